#include "csmt/client.hpp"
#include "csmt/errors.hpp"
#include "csmt/exclusivity.hpp"
#include "csmt/prover.hpp"
#include "csmt/verifier.hpp"
#include "csmt/workspace.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace csmt;

namespace {

struct StudyFixture {
    Registry registry;
    TranscriptBackend backend{registry, Bytes{42}};
    PhrStore phr;
    StudyProver prover{registry, backend, phr};
    KeyPair ltr_keys;
    KeyPair mrp_keys;
    CohortSpec cohort;
    BuildOutcome build;
    TreeConfig config;

    explicit StudyFixture(unsigned height = 8, unsigned n_users = 10, unsigned n_included = 6,
                          std::uint64_t seed = 7) {
        TransformSpec spec;
        spec.id = "fx/id";
        spec.kind = TransformKind::identity;
        spec.input_dim = 1;
        spec.output_dim = 1;
        spec.scale = 8;
        registry.add_transform(spec);

        std::mt19937_64 rng(seed);
        for (unsigned i = 0; i < n_users; ++i) {
            const std::string user = "user-" + std::to_string(i);
            phr.register_record(user, {double(rng() % 200)});
            cohort.all_users.push_back(user);
            if (i < n_included) cohort.included.push_back(user);
        }
        ltr_keys = backend.setup(backend.ltr_circuit("fx/id"), 128);
        mrp_keys = backend.setup(backend.mrp_circuit(kSumAggregatorId, 8), 128);
        prover.register_keys(ltr_keys);
        prover.register_keys(mrp_keys);
        config = TreeConfig{height, "fx/id", kSumAggregatorId, 8};
        build = prover.build_study("study", "main", cohort, config, ltr_keys.vk, mrp_keys.vk);
    }

    const DeliveryRecord& delivery(const std::string& user) const {
        for (const DeliveryRecord& d : build.deliveries) {
            if (d.user_id == user) return d;
        }
        raise(errc::not_found, user);
    }

    Digest256 default_leaf() const {
        return leaf_digest(default_element(registry.transform("fx/id")));
    }

    CsmtProofSet proof_set(const std::string& user, const Bytes& eta) const {
        const DeliveryRecord& d = delivery(user);
        return prover.prove_set(d.h_raw, d.h_tau, eta, ltr_keys.vk, mrp_keys.vk, build.root_digest);
    }

    VerIncResult run_ver_inc(const std::string& user, const CsmtProofSet& set,
                             const Bytes& eta) const {
        const DeliveryRecord& d = delivery(user);
        return ver_inc(d.h_raw, d.h_tau, set.ltr.at(fields::kOutput), set, build.root_digest,
                       hash_node(eta), ltr_keys.vk, mrp_keys.vk, default_leaf());
    }
};

} // namespace

TEST_SUITE_BEGIN("prover_verifier");

TEST_CASE("leaf_transform is deterministic and separates users by salt") {
    StudyFixture fx;
    const TransformSpec& spec = fx.registry.transform("fx/id");
    const UserSalt mu = random_user_salt();
    const TransformSalt tau = random_transform_salt();

    const LeafTransformOutcome a =
        fx.prover.leaf_transform("x", std::vector<double>{17.0}, mu, tau, spec, 8);
    const LeafTransformOutcome b =
        fx.prover.leaf_transform("x", std::vector<double>{17.0}, mu, tau, spec, 8);
    CHECK(a.leaf_digest == b.leaf_digest);
    CHECK(a.index == b.index);
    CHECK(a.index == derive_leaf_index(a.leaf_digest, 8));

    const LeafTransformOutcome c = fx.prover.leaf_transform(
        "y", std::vector<double>{17.0}, random_user_salt(), random_transform_salt(), spec, 8);
    CHECK(a.leaf_digest != c.leaf_digest); // same datum, different salts
}

TEST_CASE("build over the empty inclusion set gives the all-default root") {
    StudyFixture fx;
    CohortSpec empty{fx.cohort.all_users, {}};
    const BuildOutcome out =
        fx.prover.build_study("study-empty", "main", empty, fx.config, fx.ltr_keys.vk, fx.mrp_keys.vk);
    const Tree reference = Tree::build(fx.registry, fx.config, {});
    CHECK(out.root_digest == reference.root_digest());
}

TEST_CASE("full-cohort root equals the flat payload sum and rebuilds identically") {
    StudyFixture fx(10, 12, 12, 3);
    std::int64_t flat = 0;
    for (const std::string& user : fx.cohort.all_users) {
        flat += encode_fixed(fx.phr.record(user).datum[0], 8).raw;
    }
    CHECK(fx.build.root.payload[0].raw == flat);

    const BuildOutcome again = fx.prover.build_study("study-2", "main", fx.cohort, fx.config,
                                                     fx.ltr_keys.vk, fx.mrp_keys.vk);
    CHECK(again.root_digest == fx.build.root_digest);
}

TEST_CASE("ltr_prove round trip, unknown digests, and cross-user artifacts") {
    StudyFixture fx;
    const DeliveryRecord& a = fx.delivery("user-0");
    const LtrProveOutcome out = fx.prover.ltr_prove(a.h_raw, a.h_tau, fx.ltr_keys.vk, 8);
    CHECK(ltr_verify(fx.ltr_keys.vk, out.artifact, a.h_raw, a.h_tau, out.leaf_digest).ok);

    // user not processed by this CRO is signaled with not-found
    CHECK_THROWS_AS(fx.prover.ltr_prove(hash_node(Bytes{1}), a.h_tau, fx.ltr_keys.vk, 8), Error);

    // A's artifact presented against B's digests fails field consistency
    const DeliveryRecord& b = fx.delivery("user-1");
    CHECK(!ltr_verify(fx.ltr_keys.vk, out.artifact, b.h_raw, b.h_tau, out.leaf_digest).ok);
}

TEST_CASE("mrp_prove produces K chained hops ending at the root") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    const DeliveryRecord& d = fx.delivery("user-2");
    const LtrProveOutcome ltr = fx.prover.ltr_prove(d.h_raw, d.h_tau, fx.ltr_keys.vk, 8);
    const MrpProveOutcome mrp =
        fx.prover.mrp_prove(ltr.leaf_digest, ltr.index, eta, fx.mrp_keys.vk, fx.build.root_digest);

    REQUIRE(mrp.hops.size() == 8);
    CHECK(mrp.hops.back().at(fields::kParent) == fx.build.root_digest);

    // hop chaining: path-side input of hop k equals parent of hop k-1
    for (unsigned k = 1; k < 8; ++k) {
        const bool bit = ltr.index.branch_bit_at_level(k);
        const Digest256& path_side =
            mrp.hops[k].at(bit ? fields::kRightInput : fields::kLeftInput);
        CHECK(path_side == mrp.hops[k - 1].at(fields::kParent));
    }
    const bool bit0 = ltr.index.branch_bit_at_level(0);
    CHECK(mrp.hops[0].at(bit0 ? fields::kRightInput : fields::kLeftInput) == ltr.leaf_digest);

    // index/leaf-hash inconsistency is rejected
    CHECK_THROWS_AS(fx.prover.mrp_prove(ltr.leaf_digest,
                                        LeafIndex::from_value((ltr.index.value() + 1) % 256, 8),
                                        eta, fx.mrp_keys.vk, fx.build.root_digest),
                    Error);
    // no tree under a foreign root
    CHECK_THROWS_AS(
        fx.prover.mrp_prove(ltr.leaf_digest, ltr.index, eta, fx.mrp_keys.vk, hash_node(Bytes{2})),
        Error);
}

TEST_CASE("ver_inc accepts honest inclusion sets for every included user") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    for (const std::string& user : fx.cohort.included) {
        const CsmtProofSet set = fx.proof_set(user, eta);
        const VerIncResult result = fx.run_ver_inc(user, set, eta);
        CHECK(result.verdict == MembershipVerdict::included);
    }
}

TEST_CASE("ver_inc surfaces excluded users as verified exclusions") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    for (std::size_t i = fx.cohort.included.size(); i < fx.cohort.all_users.size(); ++i) {
        const std::string& user = fx.cohort.all_users[i];
        const CsmtProofSet set = fx.proof_set(user, eta);
        const VerIncResult result = fx.run_ver_inc(user, set, eta);
        CHECK(result.verdict == MembershipVerdict::excluded);

        // hop 0's path-side input is the default-leaf digest
        const LeafIndex idx = derive_leaf_index(set.ltr.at(fields::kOutput), 8);
        const bool bit0 = idx.branch_bit_at_level(0);
        CHECK(set.mrp_hops[0].at(bit0 ? fields::kRightInput : fields::kLeftInput) ==
              fx.default_leaf());
    }
}

TEST_CASE("per-hop tamper sweep fails at the mutated hop") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    const std::string user = fx.cohort.included[0];
    const CsmtProofSet honest = fx.proof_set(user, eta);

    for (unsigned k = 0; k < 8; ++k) {
        CsmtProofSet tampered = honest;
        // mutate the parent digest of hop k
        for (PublicField& f : tampered.mrp_hops[k].publics) {
            if (f.name == fields::kParent) f.value.bytes[3] ^= 0x40;
        }
        const VerIncResult result = fx.run_ver_inc(user, tampered, eta);
        CHECK(result.verdict == MembershipVerdict::failed);
        CHECK(result.failed_stage == "hop");
        CHECK(result.failed_hop == int(k));
    }
}

TEST_CASE("a replayed nonce fails hop verification") {
    StudyFixture fx;
    const Bytes eta1 = random_bytes(16);
    const Bytes eta2 = random_bytes(16);
    const std::string user = fx.cohort.included[1];
    const CsmtProofSet set = fx.proof_set(user, eta1);
    const VerIncResult replayed = fx.run_ver_inc(user, set, eta2);
    CHECK(replayed.verdict == MembershipVerdict::failed);
    CHECK(replayed.failed_stage == "hop");

    // two sessions differ in their nonce field
    const CsmtProofSet set2 = fx.proof_set(user, eta2);
    CHECK(set.mrp_hops[0].at(fields::kNonce) != set2.mrp_hops[0].at(fields::kNonce));
}

TEST_CASE("a wrong root fails at the root stage") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    const std::string user = fx.cohort.included[2];
    const CsmtProofSet set = fx.proof_set(user, eta);
    const DeliveryRecord& d = fx.delivery(user);
    Digest256 wrong_root = fx.build.root_digest;
    wrong_root.bytes[0] ^= 1;
    const VerIncResult result =
        ver_inc(d.h_raw, d.h_tau, set.ltr.at(fields::kOutput), set, wrong_root, hash_node(eta),
                fx.ltr_keys.vk, fx.mrp_keys.vk, fx.default_leaf());
    CHECK(result.verdict == MembershipVerdict::failed);
    CHECK(result.failed_stage == "root");
}

TEST_CASE("membership orchestration against the in-process prover") {
    StudyFixture fx;
    LocalProverClient client(fx.prover, fx.ltr_keys.vk, fx.mrp_keys.vk, fx.build.root_digest, 8);

    MembershipContext ctx;
    const std::string user = fx.cohort.included[3];
    const DeliveryRecord& d = fx.delivery(user);
    ctx.user_id = user;
    ctx.h_raw = d.h_raw;
    ctx.h_tau = d.h_tau;
    ctx.h_root = fx.build.root_digest;
    ctx.vk_ltr = fx.ltr_keys.vk;
    ctx.vk_mrp = fx.mrp_keys.vk;
    ctx.default_leaf_digest = fx.default_leaf();
    ctx.tree_height = 8;

    const MembershipReport report = run_membership_check(ctx, client, random_bytes(16));
    CHECK(report.verdict == MembershipVerdict::included);
    for (const StageOutcome& stage : report.stages) CHECK(stage.ok);

    // offline re-verification of the received set under the same nonce
    const Bytes eta2 = random_bytes(16);
    const CsmtProofSet stored = fx.proof_set(user, eta2);
    const MembershipReport offline = verify_stored_proof_set(ctx, stored, eta2);
    CHECK(offline.verdict == MembershipVerdict::included);
}

namespace {

AuditBundle honest_audit_bundle(const StudyFixture& fx, const Bytes& eta) {
    AuditBundle bundle;
    bundle.phr_root = fx.phr.root();
    bundle.root_digest = fx.build.root_digest;
    bundle.eta = eta;
    const StoredTree* stored = fx.prover.store().find_tree(fx.build.root_digest);
    REQUIRE(stored != nullptr);
    for (const auto& [index, leaf] : stored->tree->occupied()) {
        bundle.claimed_leaves.push_back(leaf_digest(leaf));
    }
    for (const std::string& user : fx.cohort.included) {
        const DeliveryRecord& d = fx.delivery(user);
        bundle.included.push_back(
            AuditMember{user, d.h_raw, d.h_tau, fx.phr.prove_membership(d.h_raw, d.h_tau)});
        bundle.proof_sets.emplace_back(user, fx.proof_set(user, eta));
    }
    return bundle;
}

std::vector<Digest256> fixture_defaults(const StudyFixture& fx) {
    return default_level_digests(fx.registry, fx.config);
}

} // namespace

TEST_CASE("mrp_hop_verify rejects swapped siblings on an asymmetric hop") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    // find a hop whose left and right inputs differ
    for (const std::string& user : fx.cohort.included) {
        const CsmtProofSet set = fx.proof_set(user, eta);
        for (std::size_t k = 0; k < set.mrp_hops.size(); ++k) {
            const ProofArtifact& hop = set.mrp_hops[k];
            const Digest256& left = hop.at(fields::kLeftInput);
            const Digest256& right = hop.at(fields::kRightInput);
            if (left == right) continue;
            const Digest256& bit = hop.at(fields::kBit);
            CHECK(mrp_hop_verify(fx.mrp_keys.vk, hop, left, right, bit, hash_node(eta)).ok);
            CHECK(!mrp_hop_verify(fx.mrp_keys.vk, hop, right, left, bit, hash_node(eta)).ok);
            return;
        }
    }
    FAIL("no asymmetric hop found");
}

TEST_CASE("a prover answering with a different leaf's path is caught") {
    StudyFixture fx;
    // malicious CRO: MRP reply walks another user's leaf
    struct SwappingClient : ProverClient {
        StudyFixture& fx;
        std::string other;
        explicit SwappingClient(StudyFixture& f, std::string o) : fx(f), other(std::move(o)) {}
        LtrProveReply ltr_prove(const Digest256& h_raw, const Digest256& h_tau) override {
            const LtrProveOutcome out = fx.prover.ltr_prove(h_raw, h_tau, fx.ltr_keys.vk, 8);
            return LtrProveReply{out.leaf_digest, out.index.value(), out.artifact};
        }
        MrpProveReply mrp_prove(const Digest256&, std::uint64_t, const Bytes& eta) override {
            const DeliveryRecord& d = fx.delivery(other);
            const LtrProveOutcome theirs = fx.prover.ltr_prove(d.h_raw, d.h_tau, fx.ltr_keys.vk, 8);
            const MrpProveOutcome out = fx.prover.mrp_prove(theirs.leaf_digest, theirs.index, eta,
                                                            fx.mrp_keys.vk, fx.build.root_digest);
            return MrpProveReply{out.root_digest, out.hops, out.path};
        }
    };

    const std::string user = fx.cohort.included[0];
    const DeliveryRecord& d = fx.delivery(user);
    MembershipContext ctx;
    ctx.user_id = user;
    ctx.h_raw = d.h_raw;
    ctx.h_tau = d.h_tau;
    ctx.h_root = fx.build.root_digest;
    ctx.vk_ltr = fx.ltr_keys.vk;
    ctx.vk_mrp = fx.mrp_keys.vk;
    ctx.default_leaf_digest = fx.default_leaf();
    ctx.tree_height = 8;

    SwappingClient client(fx, fx.cohort.included[1]);
    const MembershipReport report = run_membership_check(ctx, client, random_bytes(16));
    CHECK(report.verdict == MembershipVerdict::failed);
}

TEST_CASE("a proof set with the wrong hop count is rejected at the path stage") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    const std::string user = fx.cohort.included[0];
    const DeliveryRecord& d = fx.delivery(user);
    MembershipContext ctx;
    ctx.user_id = user;
    ctx.h_raw = d.h_raw;
    ctx.h_tau = d.h_tau;
    ctx.h_root = fx.build.root_digest;
    ctx.vk_ltr = fx.ltr_keys.vk;
    ctx.vk_mrp = fx.mrp_keys.vk;
    ctx.default_leaf_digest = fx.default_leaf();
    ctx.tree_height = 8;

    CsmtProofSet shortened = fx.proof_set(user, eta);
    shortened.mrp_hops.pop_back();
    shortened.path.bits.pop_back();
    const MembershipReport report = verify_stored_proof_set(ctx, shortened, eta);
    CHECK(report.verdict == MembershipVerdict::failed);
}

TEST_CASE("build outcome is independent of the user iteration order") {
    std::mt19937_64 rng(51);
    StudyFixture fx(10, 9, 5, 19);
    CohortSpec shuffled = fx.cohort;
    std::shuffle(shuffled.all_users.begin(), shuffled.all_users.end(), rng);
    const BuildOutcome again = fx.prover.build_study("study-shuffled", "main", shuffled, fx.config,
                                                     fx.ltr_keys.vk, fx.mrp_keys.vk);
    CHECK(again.root_digest == fx.build.root_digest);
}

TEST_CASE("honest audit bundles pass the data-exclusivity check") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    const AuditBundle bundle = honest_audit_bundle(fx, eta);
    const AuditOutcome outcome =
        verify_data_exclusivity(bundle, fx.ltr_keys.vk, fx.mrp_keys.vk, fixture_defaults(fx));
    CHECK(outcome.ok());
}

TEST_CASE("an injected spurious leaf is detected") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);

    // adversarial CRO: rebuild the tree with one extra leaf it never claims
    const StoredTree* stored = fx.prover.store().find_tree(fx.build.root_digest);
    std::vector<std::pair<std::uint64_t, LeafValue>> leaves(stored->tree->occupied().begin(),
                                                            stored->tree->occupied().end());
    LeafValue injected{{encode_fixed(99.0, 8)}, random_transform_salt()};
    std::uint64_t free_slot = 0;
    while (stored->tree->is_occupied(free_slot)) ++free_slot;
    leaves.emplace_back(free_slot, injected);
    auto tampered = std::make_shared<Tree>(Tree::build(fx.registry, fx.config, leaves));
    fx.prover.store().put_tree(
        StoredTree{"study", "tampered", stored->ltr_circuit, stored->mrp_circuit, tampered});

    AuditBundle bundle;
    bundle.phr_root = fx.phr.root();
    bundle.root_digest = tampered->root_digest();
    bundle.eta = eta;
    for (const std::string& user : fx.cohort.included) {
        const DeliveryRecord& d = fx.delivery(user);
        bundle.claimed_leaves.push_back(
            fx.prover.ltr_prove(d.h_raw, d.h_tau, fx.ltr_keys.vk, 8).leaf_digest);
        bundle.included.push_back(
            AuditMember{user, d.h_raw, d.h_tau, fx.phr.prove_membership(d.h_raw, d.h_tau)});
        bundle.proof_sets.emplace_back(
            user, fx.prover.prove_set(d.h_raw, d.h_tau, eta, fx.ltr_keys.vk, fx.mrp_keys.vk,
                                      tampered->root_digest()));
    }
    const AuditOutcome outcome =
        verify_data_exclusivity(bundle, fx.ltr_keys.vk, fx.mrp_keys.vk, fixture_defaults(fx));
    CHECK(outcome.status == AuditStatus::spurious_leaf);
}

TEST_CASE("an omitted proof set is an incomplete bundle") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    AuditBundle bundle = honest_audit_bundle(fx, eta);
    bundle.proof_sets.pop_back();
    const AuditOutcome outcome =
        verify_data_exclusivity(bundle, fx.ltr_keys.vk, fx.mrp_keys.vk, fixture_defaults(fx));
    CHECK(outcome.status == AuditStatus::incomplete_bundle);
}

TEST_CASE("an LTR tuple without PHR provenance is detected") {
    StudyFixture fx;
    const Bytes eta = random_bytes(16);
    AuditBundle bundle = honest_audit_bundle(fx, eta);
    // forge the PHR path of one member
    bundle.included[0].phr_path.siblings[0].bytes[4] ^= 0x20;
    const AuditOutcome outcome =
        verify_data_exclusivity(bundle, fx.ltr_keys.vk, fx.mrp_keys.vk, fixture_defaults(fx));
    CHECK(outcome.status == AuditStatus::spurious_leaf);
}

TEST_SUITE_END();
