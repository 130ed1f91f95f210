#include "csmt/digest.hpp"
#include "csmt/errors.hpp"
#include "csmt/fixed_point.hpp"
#include "csmt/index.hpp"
#include "csmt/salt.hpp"
#include "csmt/serialize.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace csmt;

TEST_SUITE_BEGIN("core");

TEST_CASE("hash_node matches published SHA-256 vectors") {
    CHECK(hash_node(Bytes{}).hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const Bytes abc{'a', 'b', 'c'};
    CHECK(hash_node(abc).hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hash_node(abc) == hash_node(abc));
}

TEST_CASE("hash_node collision absence over random distinct inputs") {
    std::mt19937_64 rng(42);
    std::set<Digest256> seen;
    Bytes buf(16);
    for (int i = 0; i < 100000; ++i) {
        for (auto& b : buf) b = std::uint8_t(rng());
        // make inputs distinct by construction
        std::uint64_t ctr = std::uint64_t(i);
        for (int j = 0; j < 8; ++j) buf[std::size_t(j)] = std::uint8_t(ctr >> (8 * j));
        CHECK(seen.insert(hash_node(buf)).second);
    }
}

TEST_CASE("canonical serialization encodes fixed points per the wire rule") {
    CanonicalWriter w;
    w.add_fixed(FixedPoint{192, 8});
    const Bytes bytes = w.bytes();
    const Bytes expected{0x01,                                           // version
                         0x09, 0x00, 0x00, 0x00,                         // length 9
                         0xC0, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // raw=192 LE
                         0x08};                                          // scale
    CHECK(bytes == expected);
}

TEST_CASE("empty field list serializes to the version byte only") {
    CanonicalWriter w;
    CHECK(w.bytes() == Bytes{kSerializationVersion});
}

TEST_CASE("serialization is deterministic over random values") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        std::vector<FixedPoint> payload;
        const int n = int(rng() % 8);
        for (int j = 0; j < n; ++j) {
            payload.push_back(FixedPoint{std::int64_t(rng()) >> 8, std::uint8_t(rng() % 15)});
        }
        CHECK(serialize_payload(payload) == serialize_payload(payload));
    }
}

TEST_CASE("canonical serialization is injective over random structured values") {
    std::mt19937_64 rng(11);
    std::set<Digest256> digests;
    for (int i = 0; i < 100000; ++i) {
        // three fixed fields seeded with a distinct counter
        std::vector<FixedPoint> payload{FixedPoint{std::int64_t(i), 8},
                                        FixedPoint{std::int64_t(rng() & 0xffff), 10},
                                        FixedPoint{-std::int64_t(rng() & 0xff), 12}};
        CHECK(digests.insert(hash_node(serialize_payload(payload))).second);
    }
}

TEST_CASE("encode_fixed quantizes with round-half-to-even") {
    CHECK(encode_fixed(0.75, 8).raw == 192);
    for (unsigned s : {0u, 4u, 8u, 14u, 30u}) CHECK(encode_fixed(0.0, s).raw == 0);
    CHECK(encode_fixed(0.5, 0).raw == 0);  // ties to even
    CHECK(encode_fixed(1.5, 0).raw == 2);
    CHECK(encode_fixed(2.5, 0).raw == 2);
    CHECK(encode_fixed(-0.5, 0).raw == 0);
    CHECK(encode_fixed(3.0 / 512.0, 8).raw == 2); // 1.5 at scale 8 rounds to even
}

TEST_CASE("decode reproduces encode within half a quantum") {
    const double x = -0.6931;
    CHECK(std::abs(decode_fixed(encode_fixed(x, 14)) - x) <= std::ldexp(1.0, -15));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (unsigned s : {8u, 10u, 12u, 14u}) {
        for (int i = 0; i < 2000; ++i) {
            const double v = dist(rng);
            CHECK(std::abs(decode_fixed(encode_fixed(v, s)) - v) <= std::ldexp(1.0, -int(s) - 1));
        }
    }
}

TEST_CASE("encode_fixed rejects overflow and bad scales") {
    CHECK_THROWS_AS(encode_fixed(1.0, 63), Error);
    CHECK_THROWS_AS(encode_fixed(std::ldexp(1.0, 40), 30), Error); // 2^70 overflows
    CHECK_THROWS_AS(encode_fixed(std::nan(""), 8), Error);
}

TEST_CASE("fp_add checks scales and overflow") {
    CHECK(fp_add(FixedPoint{3, 8}, FixedPoint{4, 8}).raw == 7);
    CHECK_THROWS_AS(fp_add(FixedPoint{1, 8}, FixedPoint{1, 10}), Error);
    CHECK_THROWS_AS(fp_add(FixedPoint{INT64_MAX, 8}, FixedPoint{1, 8}), Error);
}

TEST_CASE("derive_leaf_index takes the top digest bits") {
    Digest256 digest;
    digest.bytes[0] = 0xA7;
    digest.bytes[1] = 0xFF;
    CHECK(derive_leaf_index(digest, 8).value() == 167);
    CHECK(derive_leaf_index(digest, 4).value() == 0xA);

    Digest256 zero_msb;
    zero_msb.bytes[0] = 0x7F;
    CHECK(derive_leaf_index(zero_msb, 1).value() == 0);

    // K = 256 keeps the full digest
    Digest256 full = hash_node(Bytes{1, 2, 3});
    CHECK(derive_leaf_index(full, 256).packed() == full.bytes);
}

TEST_CASE("index equality is a pure function of digest and height") {
    const Digest256 d = hash_node(Bytes{9});
    Digest256 d2 = d;
    CHECK(derive_leaf_index(d, 16) == derive_leaf_index(d2, 16));
}

TEST_CASE("index_to_path expands big-endian and refolds") {
    const BinaryPath p5 = index_to_path(5, 3);
    CHECK(p5.bits == std::vector<std::uint8_t>{1, 0, 1});
    const BinaryPath p0 = index_to_path(0, 4);
    CHECK(p0.bits == std::vector<std::uint8_t>{0, 0, 0, 0});

    CHECK_THROWS_AS(index_to_path(8, 3), Error); // index >= 2^K

    for (unsigned K : {1u, 2u, 7u, 10u, 12u}) {
        for (std::uint64_t i = 0; i < (std::uint64_t(1) << K); ++i) {
            const BinaryPath path = index_to_path(i, K);
            CHECK(path.size() == K);
            CHECK(path_to_value(path) == i);
        }
    }
}

TEST_CASE("branch_bit_at_level mirrors the path") {
    const LeafIndex idx = LeafIndex::from_value(0b1011, 4);
    const BinaryPath path = index_to_path(idx);
    for (unsigned level = 0; level < 4; ++level) {
        CHECK(idx.branch_bit_at_level(level) == bool(path.bits[4 - 1 - level]));
    }
}

TEST_CASE("salts come from a strong source and digests are stable") {
    const UserSalt mu = random_user_salt();
    const TransformSalt tau = random_transform_salt();
    CHECK(mu.bytes != UserSalt{}.bytes);       // all-zero draw is 2^-128
    CHECK(tau_digest(tau) == tau_digest(tau));

    const std::vector<double> datum{17.0, 1.0};
    CHECK(record_digest(datum, mu) == record_digest(datum, mu));
    UserSalt other = random_user_salt();
    CHECK(record_digest(datum, mu) != record_digest(datum, other));
}

TEST_SUITE_END();
