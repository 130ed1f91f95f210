#pragma once

#include "csmt/index.hpp"
#include "csmt/phr.hpp"
#include "csmt/proof.hpp"
#include "csmt/witness_store.hpp"

#include <map>
#include <string>
#include <vector>

namespace csmt {

/// Study cohort: the full transformed user set U and the included subset
/// U^inc whose leaves enter the tree. Every user in U gets a witness so
/// both inclusion and exclusion proofs can be served.
struct CohortSpec {
    std::vector<std::string> all_users;
    std::vector<std::string> included;
};

/// Collated inclusion/exclusion evidence: one leaf-transform artifact plus the K chained
/// per-hop aggregation artifacts for a single participant.
struct CsmtProofSet {
    ProofArtifact ltr;
    std::vector<ProofArtifact> mrp_hops;
    BinaryPath path;
    Digest256 root_digest;
};

struct LeafTransformOutcome {
    LeafValue leaf;
    Digest256 leaf_digest;
    Digest256 tau_digest;
    LeafIndex index;
};

struct DeliveryRecord {
    std::string user_id;
    Digest256 h_raw;
    Digest256 h_tau;
};

struct BuildOutcome {
    NodeValue root;
    Digest256 root_digest;
    std::vector<DeliveryRecord> deliveries; // per-user H^tau distribution
    unsigned collision_redraws = 0;
};

struct LtrProveOutcome {
    Digest256 leaf_digest;
    LeafIndex index;
    ProofArtifact artifact;
};

struct MrpProveOutcome {
    Digest256 root_digest;
    std::vector<ProofArtifact> hops;
    BinaryPath path;
};

enum class CollisionPolicy {
    fail,        // abort the build naming the colliding users
    redraw_tau,  // remediate by re-drawing the transform salt in the PHR
};

/// CRO-side prover: salted leaf transformation with private witness
/// storage, tree construction over the included cohort, and LTR / per-hop
/// MRP proof generation against a built tree.
class StudyProver {
public:
    StudyProver(const Registry& registry, TranscriptBackend& backend, PhrStore& phr);

    void register_keys(const KeyPair& keys);
    const KeyPair& keys_for(const CircuitId& circuit) const;
    const KeyPair& keys_for_vk(const VerificationKey& vk) const;

    /// Transform one user's record, store the witness privately, and return
    /// the leaf digest, salt digest and derived index at the given height.
    LeafTransformOutcome leaf_transform(const std::string& user_id, std::span<const double> datum,
                                        const UserSalt& mu, const TransformSalt& tau,
                                        const TransformSpec& spec, unsigned tree_height);

    /// Transform every user in the cohort (fetching records from the PHR),
    /// enforce index uniqueness across all of U, build the tree over U^inc,
    /// and retain it for proof generation.
    BuildOutcome build_study(const std::string& study_id, const std::string& tree_label,
                             const CohortSpec& cohort, const TreeConfig& config,
                             const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                             CollisionPolicy policy = CollisionPolicy::redraw_tau);

    LtrProveOutcome ltr_prove(const Digest256& h_raw, const Digest256& h_tau,
                              const VerificationKey& vk_ltr, unsigned tree_height) const;

    /// K hop artifacts for the path from the derived index to the root of
    /// the tree published under root_digest. eta is the verifier's session
    /// nonce (16 bytes); its digest is bound into every hop.
    MrpProveOutcome mrp_prove(const Digest256& h_leaf, const LeafIndex& index, const Bytes& eta,
                              const VerificationKey& vk_mrp, const Digest256& root_digest) const;

    /// LTR + MRP convenience collation for one user against one tree.
    CsmtProofSet prove_set(const Digest256& h_raw, const Digest256& h_tau, const Bytes& eta,
                           const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                           const Digest256& root_digest) const;

    WitnessStore& store() { return store_; }
    const WitnessStore& store() const { return store_; }
    const Registry& registry() const { return registry_; }
    TranscriptBackend& backend() { return backend_; }
    PhrStore& phr() { return phr_; }

private:
    const Registry& registry_;
    TranscriptBackend& backend_;
    PhrStore& phr_;
    WitnessStore store_;
    std::map<Digest256, KeyPair> keys_; // by circuit digest
};

} // namespace csmt
