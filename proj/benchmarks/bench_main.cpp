#include "csmt/phr.hpp"
#include "csmt/prover.hpp"
#include "csmt/serialize.hpp"
#include "csmt/tree.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <set>

using namespace csmt;

namespace {

Registry make_registry() {
    Registry registry;
    TransformSpec spec;
    spec.id = "bench/id";
    spec.kind = TransformKind::identity;
    spec.input_dim = 1;
    spec.output_dim = 1;
    spec.scale = 8;
    registry.add_transform(spec);
    return registry;
}

std::vector<std::pair<std::uint64_t, LeafValue>> random_leaves(unsigned n, unsigned height,
                                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
    std::set<std::uint64_t> used;
    while (leaves.size() < n) {
        const std::uint64_t index = rng() & ((std::uint64_t(1) << height) - 1);
        if (!used.insert(index).second) continue;
        leaves.emplace_back(index,
                            LeafValue{{FixedPoint{std::int64_t(rng() % 100000), 8}},
                                      TransformSalt{}});
    }
    return leaves;
}

void BM_HashNode(benchmark::State& state) {
    Bytes data(std::size_t(state.range(0)), 0xAB);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hash_node(data));
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HashNode)->Arg(64)->Arg(1024)->Arg(65536);

void BM_SerializePayload(benchmark::State& state) {
    std::vector<FixedPoint> payload(std::size_t(state.range(0)), FixedPoint{12345, 8});
    for (auto _ : state) {
        benchmark::DoNotOptimize(serialize_payload(payload));
    }
}
BENCHMARK(BM_SerializePayload)->Arg(1)->Arg(12)->Arg(128);

void BM_TreeBuild(benchmark::State& state) {
    const Registry registry = make_registry();
    const unsigned height = unsigned(state.range(0));
    const unsigned n = unsigned(state.range(1));
    const auto leaves = random_leaves(n, height, 99);
    const TreeConfig config{height, "bench/id", kSumAggregatorId, 8};
    for (auto _ : state) {
        benchmark::DoNotOptimize(Tree::build(registry, config, leaves));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TreeBuild)->Args({16, 64})->Args({16, 512})->Args({24, 512});

void BM_SiblingsAlongPath(benchmark::State& state) {
    const Registry registry = make_registry();
    const unsigned height = 20;
    const auto leaves = random_leaves(256, height, 7);
    const Tree tree =
        Tree::build(registry, {height, "bench/id", kSumAggregatorId, 8}, leaves);
    const LeafIndex index = LeafIndex::from_value(leaves.front().first, height);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tree.siblings_along_path(index));
    }
}
BENCHMARK(BM_SiblingsAlongPath);

void BM_HopProve(benchmark::State& state) {
    Registry registry = make_registry();
    TranscriptBackend backend(registry, Bytes{1});
    PhrStore phr;
    StudyProver prover(registry, backend, phr);
    for (int i = 0; i < 32; ++i) phr.register_record("u" + std::to_string(i), {double(i)});
    CohortSpec cohort;
    for (int i = 0; i < 32; ++i) cohort.all_users.push_back("u" + std::to_string(i));
    cohort.included = cohort.all_users;
    const KeyPair ltr = backend.setup(backend.ltr_circuit("bench/id"), 128);
    const KeyPair mrp = backend.setup(backend.mrp_circuit(kSumAggregatorId, 8), 128);
    prover.register_keys(ltr);
    prover.register_keys(mrp);
    const BuildOutcome build = prover.build_study(
        "bench", "main", cohort, {16, "bench/id", kSumAggregatorId, 8}, ltr.vk, mrp.vk);
    const DeliveryRecord& d = build.deliveries.front();
    const Bytes eta = random_bytes(16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            prover.prove_set(d.h_raw, d.h_tau, eta, ltr.vk, mrp.vk, build.root_digest));
    }
}
BENCHMARK(BM_HopProve);

} // namespace

BENCHMARK_MAIN();
