#include "csmt/errors.hpp"
#include "csmt/json_io.hpp"
#include "csmt/tree.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace csmt;

namespace {

Registry registry_with(const TransformSpec& spec) {
    Registry registry;
    registry.add_transform(spec);
    return registry;
}

TransformSpec scalar_identity(unsigned scale = 8) {
    TransformSpec spec;
    spec.id = "t/id";
    spec.kind = TransformKind::identity;
    spec.input_dim = 1;
    spec.output_dim = 1;
    spec.scale = scale;
    return spec;
}

LeafValue scalar_leaf(std::int64_t value, unsigned scale = 8) {
    return LeafValue{{FixedPoint{value * (std::int64_t(1) << scale), std::uint8_t(scale)}},
                     random_transform_salt()};
}

} // namespace

TEST_SUITE_BEGIN("tree");

TEST_CASE("all-default tree has the zero root from the default chain") {
    const Registry registry = registry_with(scalar_identity());
    const TreeConfig config{4, "t/id", kSumAggregatorId, 8};
    const Tree tree = Tree::build(registry, config, {});
    CHECK(tree.root().payload == std::vector<FixedPoint>{FixedPoint{0, 8}});
    CHECK(tree.root() == tree.default_chain()[4]);
}

TEST_CASE("two-leaf K=3 example sums to [12] with the right siblings") {
    const Registry registry = registry_with(scalar_identity());
    const TreeConfig config{3, "t/id", kSumAggregatorId, 8};
    const LeafValue five = scalar_leaf(5);
    const LeafValue seven = scalar_leaf(7);
    const Tree tree = Tree::build(registry, config, {{2, five}, {6, seven}});

    CHECK(tree.root().payload[0].raw == 12 * 256);

    // parent recomputation oracle at the root
    const AggregatorSpec& sum = registry.aggregator(kSumAggregatorId);
    const NodeValue recomputed =
        aggregate_pair(sum, tree.node_at(2, 0), tree.node_at(2, 1));
    CHECK(recomputed == tree.root());

    // query index 2: siblings at levels 0,1 default; level-2 sibling holds [7]
    const std::vector<NodeValue> siblings = tree.siblings_along_path(LeafIndex::from_value(2, 3));
    REQUIRE(siblings.size() == 3);
    CHECK(siblings[0] == tree.default_chain()[0]);
    CHECK(siblings[1] == tree.default_chain()[1]);
    CHECK(siblings[2].payload[0].raw == 7 * 256);

    // level-0 nodes carry the inserted leaf values
    CHECK(tree.node_at(0, 2) == leaf_as_node(five));
    CHECK(tree.node_at(0, 6) == leaf_as_node(seven));
}

TEST_CASE("single occupied leaf propagates to the root unchanged") {
    const Registry registry = registry_with(scalar_identity());
    const TreeConfig config{8, "t/id", kSumAggregatorId, 8};
    const LeafValue x = scalar_leaf(1234);
    const Tree tree = Tree::build(registry, config, {{77, x}});
    CHECK(tree.root().payload == x.payload);
}

TEST_CASE("root digest is the hash of the serialized root payload") {
    const Registry registry = registry_with(scalar_identity());
    const Tree tree = Tree::build(registry, {5, "t/id", kSumAggregatorId, 8}, {{3, scalar_leaf(9)}});
    CHECK(tree.root_digest() == payload_digest(tree.root().payload));
}

TEST_CASE("root is independent of insertion order") {
    const Registry registry = registry_with(scalar_identity());
    const TreeConfig config{10, "t/id", kSumAggregatorId, 8};
    std::mt19937_64 rng(31);
    std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
    for (int i = 0; i < 20; ++i) {
        leaves.emplace_back(rng() % 1024, scalar_leaf(std::int64_t(rng() % 100)));
    }
    const Tree a = Tree::build(registry, config, leaves);
    std::shuffle(leaves.begin(), leaves.end(), rng);
    const Tree b = Tree::build(registry, config, leaves);
    CHECK(a.root() == b.root());
    CHECK(a.root_digest() == b.root_digest());
}

TEST_CASE("root payload equals the flat sum over occupied leaves") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 40; ++trial) {
        const unsigned K = 4 + unsigned(rng() % 9); // up to 12
        const Registry registry = registry_with(scalar_identity());
        std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
        std::int64_t flat = 0;
        std::set<std::uint64_t> used;
        const unsigned n = 1 + unsigned(rng() % 64);
        for (unsigned i = 0; i < n && used.size() < (1ull << K); ++i) {
            std::uint64_t idx = rng() & ((1ull << K) - 1);
            if (!used.insert(idx).second) continue;
            const std::int64_t v = std::int64_t(rng() % 1000) - 500;
            flat += v * 256;
            leaves.emplace_back(idx, scalar_leaf(v));
        }
        const Tree tree = Tree::build(registry, {K, "t/id", kSumAggregatorId, 8}, leaves);
        CHECK(tree.root().payload[0].raw == flat);
    }
}

TEST_CASE("Merkle consistency holds exhaustively for K <= 8") {
    const Registry registry = registry_with(scalar_identity());
    const AggregatorSpec& sum = registry.aggregator(kSumAggregatorId);
    std::mt19937_64 rng(41);
    for (unsigned K : {3u, 5u, 8u}) {
        std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
        for (int i = 0; i < 12; ++i) {
            leaves.emplace_back(rng() & ((1ull << K) - 1), scalar_leaf(std::int64_t(rng() % 50)));
        }
        Tree tree;
        try {
            tree = Tree::build(registry, {K, "t/id", kSumAggregatorId, 8}, leaves);
        } catch (const Error& e) {
            if (e.code() == errc::leaf_collision) continue; // rare at K=3
            throw;
        }
        for (unsigned level = 0; level < K; ++level) {
            for (std::uint64_t parent = 0; parent < (1ull << (K - level - 1)); ++parent) {
                const NodeValue expected = aggregate_pair(sum, tree.node_at(level, 2 * parent),
                                                          tree.node_at(level, 2 * parent + 1));
                CHECK(expected == tree.node_at(level + 1, parent));
            }
        }
    }
}

TEST_CASE("path fold over siblings reproduces the root for every occupied leaf") {
    const Registry registry = registry_with(scalar_identity());
    const AggregatorSpec& sum = registry.aggregator(kSumAggregatorId);
    const unsigned K = 9;
    std::mt19937_64 rng(43);
    std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
    for (int i = 0; i < 24; ++i) {
        leaves.emplace_back(rng() & ((1ull << K) - 1), scalar_leaf(std::int64_t(rng() % 30)));
    }
    const Tree tree = Tree::build(registry, {K, "t/id", kSumAggregatorId, 8}, leaves);
    for (const auto& [index, leaf] : tree.occupied()) {
        const LeafIndex idx = LeafIndex::from_value(index, K);
        const std::vector<NodeValue> siblings = tree.siblings_along_path(idx);
        NodeValue current = leaf_as_node(leaf);
        for (unsigned k = 0; k < K; ++k) {
            const bool bit = (index >> k) & 1;
            current = bit ? aggregate_pair(sum, siblings[k], current)
                          : aggregate_pair(sum, current, siblings[k]);
        }
        CHECK(current == tree.root());
    }
}

TEST_CASE("build rejects out-of-range indices and differing duplicate leaves") {
    const Registry registry = registry_with(scalar_identity());
    CHECK_THROWS_AS(
        Tree::build(registry, {3, "t/id", kSumAggregatorId, 8}, {{8, scalar_leaf(1)}}), Error);

    const LeafValue a = scalar_leaf(1);
    const LeafValue b = scalar_leaf(2);
    CHECK_THROWS_AS(Tree::build(registry, {3, "t/id", kSumAggregatorId, 8}, {{2, a}, {2, b}}),
                    Error);
    // identical duplicates merge
    const Tree tree = Tree::build(registry, {3, "t/id", kSumAggregatorId, 8}, {{2, a}, {2, a}});
    CHECK(tree.occupied().size() == 1);
}

TEST_CASE("node_at range checks") {
    const Registry registry = registry_with(scalar_identity());
    const Tree tree = Tree::build(registry, {4, "t/id", kSumAggregatorId, 8}, {});
    CHECK_THROWS_AS(tree.node_at(5, 0), Error);
    CHECK_THROWS_AS(tree.node_at(2, 4), Error);
    CHECK(tree.node_at(2, 3) == tree.default_chain()[2]);
}

TEST_CASE("tree persistence embeds the root digest and verifies on load") {
    const Registry registry = registry_with(scalar_identity());
    const Tree tree =
        Tree::build(registry, {6, "t/id", kSumAggregatorId, 8}, {{11, scalar_leaf(4)}, {40, scalar_leaf(6)}});
    io::json doc = io::tree_to_json(tree);
    const Tree loaded = io::tree_from_json(registry, doc);
    CHECK(loaded.root() == tree.root());
    CHECK(loaded.occupied().size() == 2);

    doc["root_digest"] = std::string(64, '0');
    CHECK_THROWS_AS(io::tree_from_json(registry, doc), Error);
}

TEST_SUITE_END();
