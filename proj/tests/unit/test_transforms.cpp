#include "csmt/errors.hpp"
#include "csmt/json_io.hpp"
#include "csmt/transform.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace csmt;

namespace {

TransformSpec make_identity(unsigned dims, unsigned scale) {
    TransformSpec spec;
    spec.id = "t/identity";
    spec.kind = TransformKind::identity;
    spec.input_dim = dims;
    spec.output_dim = dims;
    spec.scale = scale;
    return spec;
}

TransformSpec make_bincount(const std::vector<double>& edges, unsigned scale) {
    TransformSpec spec;
    spec.id = "t/bincount";
    spec.kind = TransformKind::bincount;
    for (double e : edges) spec.params.push_back(encode_fixed(e, scale));
    spec.input_dim = 1;
    spec.output_dim = unsigned(edges.size()) - 1;
    spec.scale = scale;
    return spec;
}

} // namespace

TEST_SUITE_BEGIN("transforms");

TEST_CASE("identity transform quantizes the datum and tags the salt") {
    const TransformSpec spec = make_identity(1, 8);
    const UserSalt mu = random_user_salt();
    const TransformSalt tau = random_transform_salt();
    const std::vector<double> datum{17.0};
    const LeafValue leaf = apply_salted_transform(spec, datum, mu, tau);
    CHECK(leaf.payload.size() == 1);
    CHECK(leaf.payload[0].raw == 17 * 256);
    CHECK(leaf.tau == tau);

    // determinism
    CHECK(apply_salted_transform(spec, datum, mu, tau) == leaf);
}

TEST_CASE("transform salts separate leaf digests across the user set") {
    const TransformSpec spec = make_identity(1, 8);
    const UserSalt mu = random_user_salt();
    const std::vector<double> datum{17.0};

    const LeafValue a = apply_salted_transform(spec, datum, mu, random_transform_salt());
    const LeafValue b = apply_salted_transform(spec, datum, mu, random_transform_salt());
    CHECK(a.payload == b.payload);
    CHECK(leaf_digest(a) != leaf_digest(b));

    std::set<Digest256> digests;
    for (int i = 0; i < 10000; ++i) {
        CHECK(digests
                  .insert(leaf_digest(apply_salted_transform(spec, datum, mu,
                                                             random_transform_salt())))
                  .second);
    }
}

TEST_CASE("bincount uses half-open bins with inclusive lower edges") {
    const std::vector<double> edges{0, 10, 20, 30, 40, 50};
    CHECK(bincount_transform(17, edges) == std::vector<double>{0, 1, 0, 0, 0});
    const std::vector<double> small_edges{0, 10, 20};
    CHECK(bincount_transform(0, small_edges) == std::vector<double>{1, 0});
    CHECK(bincount_transform(10, small_edges) == std::vector<double>{0, 1});
    CHECK_THROWS_AS(bincount_transform(50, edges), Error);
    CHECK_THROWS_AS(bincount_transform(-1, edges), Error);
    const std::vector<double> descending{10, 0};
    CHECK_THROWS_AS(bincount_transform(5, descending), Error); // not ascending
}

TEST_CASE("bincount output is one-hot for any in-range input") {
    const std::vector<double> edges{0, 3, 7.5, 12, 40};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 39.999);
    for (int i = 0; i < 5000; ++i) {
        const std::vector<double> out = bincount_transform(dist(rng), edges);
        double sum = 0;
        for (double v : out) sum += v;
        CHECK(sum == 1.0);
    }
}

TEST_CASE("bincount spec example lands in slot 1") {
    const TransformSpec spec = make_bincount({0, 10, 20, 30, 40, 50}, 8);
    const LeafValue leaf = apply_salted_transform(spec, std::vector<double>{17.0},
                                                  random_user_salt(), random_transform_salt());
    CHECK(leaf.payload.size() == 5);
    CHECK(leaf.payload[1].raw == 256);
    for (std::size_t i : {std::size_t(0), std::size_t(2), std::size_t(3), std::size_t(4)}) {
        CHECK(leaf.payload[i].raw == 0);
    }
}

TEST_CASE("loglik matches the closed form at beta = 0") {
    const std::vector<double> beta{0.0, 0.0};
    const std::vector<double> x{3.0};
    CHECK(loglik_transform(x, 1.0, beta) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(loglik_transform(x, 0.0, beta) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("loglik z=2 example agrees with the plaintext logistic oracle") {
    // oracle: l = y ln s + (1-y) ln(1-s), s = 1/(1+e^-z)
    const double z = 2.0;
    const double oracle = std::log(1.0 / (1.0 + std::exp(-z)));
    const std::vector<double> beta{2.0}; // intercept only
    CHECK(loglik_transform(std::span<const double>{}, 1.0, beta) ==
          doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(-0.1269).epsilon(1e-3));
}

TEST_CASE("quantized loglik tracks the oracle within 2^-(s-2) across scales") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.5);
    for (unsigned s : {8u, 10u, 12u, 14u}) {
        TransformSpec spec;
        spec.id = "t/loglik" + std::to_string(s);
        spec.kind = TransformKind::loglik;
        const std::vector<double> beta{0.4, 1.1, -0.7};
        for (double b : beta) spec.params.push_back(encode_fixed(b, s));
        spec.input_dim = 3; // two features + label
        spec.output_dim = 1;
        spec.scale = s;
        for (int i = 0; i < 500; ++i) {
            const std::vector<double> datum{normal(rng), normal(rng), double(rng() % 2)};
            const double oracle =
                loglik_transform(std::span<const double>(datum).first(2), datum[2], beta);
            const LeafValue leaf =
                apply_salted_transform(spec, datum, random_user_salt(), random_transform_salt());
            CHECK(std::abs(decode_fixed(leaf.payload[0]) - oracle) <= std::ldexp(1.0, -int(s) + 2));
        }
    }
}

TEST_CASE("classassess maps the boundary to class 1") {
    const std::vector<double> beta{0.0, 1.0};
    const std::vector<double> pos{3.0}, neg{-3.0}, zero{0.0};
    CHECK(classassess_transform(pos, 1.0, beta) == 1.0);  // sigma(3) > 0.5, match
    CHECK(classassess_transform(neg, 1.0, beta) == 0.0);  // mismatch
    CHECK(classassess_transform(zero, 1.0, beta) == 1.0); // boundary -> class 1
    CHECK(classassess_transform(zero, 0.0, beta) == 0.0);
}

TEST_CASE("aggregate_pair sums element-wise and recomputes the digest") {
    const AggregatorSpec sum{"sum", true, 2};
    NodeValue left{{FixedPoint{1, 8}, FixedPoint{2, 8}}, {}};
    NodeValue right{{FixedPoint{3, 8}, FixedPoint{4, 8}}, {}};
    const NodeValue parent = aggregate_pair(sum, left, right);
    CHECK(parent.payload == std::vector<FixedPoint>{FixedPoint{4, 8}, FixedPoint{6, 8}});
    CHECK(parent.digest == payload_digest(parent.payload));

    CHECK_THROWS_AS(aggregate_pair(sum, left, NodeValue{{FixedPoint{1, 8}}, {}}), Error);
    CHECK_THROWS_AS(
        aggregate_pair(sum, left, NodeValue{{FixedPoint{1, 10}, FixedPoint{1, 10}}, {}}), Error);
}

TEST_CASE("sum aggregator is a commutative monoid with the zero default") {
    const AggregatorSpec sum{"sum", true, 2};
    const TransformSpec spec = make_bincount({0, 10, 20, 30, 40, 50}, 8);
    const NodeValue zero = leaf_as_node(default_element(spec));

    std::mt19937_64 rng(23);
    auto random_node = [&] {
        NodeValue n;
        for (int i = 0; i < 5; ++i) n.payload.push_back(FixedPoint{std::int64_t(rng() % 100000), 8});
        n.digest = payload_digest(n.payload);
        return n;
    };
    for (int i = 0; i < 10000; ++i) {
        const NodeValue a = random_node();
        const NodeValue b = random_node();
        CHECK(aggregate_pair(sum, a, b).payload == aggregate_pair(sum, b, a).payload);
        CHECK(aggregate_pair(sum, a, zero).payload == a.payload);
    }
}

TEST_CASE("tree-order fold equals the flat sum (direct-summation oracle)") {
    const AggregatorSpec sum{"sum", true, 2};
    std::mt19937_64 rng(29);
    std::vector<NodeValue> nodes;
    std::int64_t flat = 0;
    for (int i = 0; i < 8; ++i) {
        const std::int64_t v = std::int64_t(rng() % 1000);
        flat += v;
        nodes.push_back(NodeValue{{FixedPoint{v, 8}}, payload_digest({{FixedPoint{v, 8}}})});
    }
    while (nodes.size() > 1) {
        std::vector<NodeValue> next;
        for (std::size_t i = 0; i < nodes.size(); i += 2) {
            next.push_back(aggregate_pair(sum, nodes[i], nodes[i + 1]));
        }
        nodes = std::move(next);
    }
    CHECK(nodes[0].payload[0].raw == flat);
}

TEST_CASE("default elements are all-zero with a constant digest") {
    const TransformSpec bc = make_bincount({0, 1, 2, 3, 4, 5}, 8);
    const LeafValue d = default_element(bc);
    CHECK(d.payload.size() == 5);
    for (const FixedPoint& f : d.payload) CHECK(f.raw == 0);
    CHECK(d.tau == TransformSalt{});
    CHECK(leaf_digest(d) == leaf_digest(default_element(bc)));

    TransformSpec ll;
    ll.id = "t/ll";
    ll.kind = TransformKind::loglik;
    ll.params = {encode_fixed(0, 8), encode_fixed(0, 8)};
    ll.input_dim = 2;
    ll.output_dim = 1;
    ll.scale = 8;
    CHECK(default_element(ll).payload == std::vector<FixedPoint>{FixedPoint{0, 8}});
}

TEST_CASE("registry loads declarative config files") {
    Registry registry;
    const io::json config = io::json::parse(R"({
        "transforms": [
            {"id": "cfg/bins", "kind": "bincount", "scale": 8, "params": [0, 11, 22, 33]},
            {"id": "cfg/model", "kind": "loglik", "scale": 10, "input_dim": 3,
             "params": [0.5, -1.25, 2.0]}
        ],
        "aggregators": [{"id": "sum"}]
    })");
    io::registry_load_config(registry, config);
    const TransformSpec& bins = registry.transform("cfg/bins");
    CHECK(bins.kind == TransformKind::bincount);
    CHECK(bins.output_dim == 3);
    CHECK(bins.params[1].raw == 11 * 256);
    const TransformSpec& model = registry.transform("cfg/model");
    CHECK(model.params.size() == 3);
    CHECK(model.scale == 10);
    // loading the same config again is idempotent
    io::registry_load_config(registry, config);
    CHECK(registry.transform_ids().size() == 2);
}

TEST_CASE("registry rejects duplicates and inconsistent shapes") {
    Registry registry;
    registry.add_transform(make_identity(2, 8));
    CHECK_THROWS_AS(registry.add_transform(make_identity(2, 8)), Error);
    CHECK(registry.has_aggregator(kSumAggregatorId));
    CHECK_THROWS_AS(registry.transform("missing"), Error);

    TransformSpec bad = make_bincount({0, 10}, 8);
    bad.id = "t/bad";
    bad.output_dim = 5; // edges say 1
    CHECK_THROWS_AS(registry.add_transform(bad), Error);
}

TEST_SUITE_END();
