#pragma once

#include "csmt/index.hpp"
#include "csmt/proof.hpp"
#include "csmt/prover.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csmt {

/// Boolean verification outcomes carry the failing check by name; they are
/// never exceptions.
struct CheckResult {
    bool ok = false;
    std::string reason;
};

/// LTR verification: backend check plus field consistency against the
/// expected record digest, salt digest, and leaf digest.
CheckResult ltr_verify(const VerificationKey& vk_ltr, const ProofArtifact& artifact,
                       const Digest256& h_raw, const Digest256& h_tau, const Digest256& h_leaf);

/// Per-hop MRP verification: backend check plus left/right/selector/nonce
/// field consistency.
CheckResult mrp_hop_verify(const VerificationKey& vk_mrp, const ProofArtifact& artifact,
                           const Digest256& h_left, const Digest256& h_right,
                           const Digest256& h_bit, const Digest256& h_eta);

enum class MembershipVerdict {
    included,           // leaf at the derived index is the record's transform
    excluded,           // leaf at the derived index is the default element
    failed,
};

const char* membership_verdict_name(MembershipVerdict verdict) noexcept;

struct VerIncResult {
    MembershipVerdict verdict = MembershipVerdict::failed;
    std::string failed_stage; // "ltr", "path", "leaf-binding", "hop", "root"; empty when verified
    int failed_hop = -1;
    std::string detail;
};

/// Full inclusion/exclusion verification of a proof set: LTR check, path
/// derivation from the leaf digest, chained per-hop verification with the
/// session nonce, and the final root equality. A default-element leaf at
/// the derived index is surfaced as a verified exclusion, not a failure.
VerIncResult ver_inc(const Digest256& h_raw, const Digest256& h_tau, const Digest256& h_leaf,
                     const CsmtProofSet& proof_set, const Digest256& h_root, const Digest256& h_eta,
                     const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                     const Digest256& default_leaf_digest);

// --- End-to-end verifier orchestration ------------------------------------

struct LtrProveReply {
    Digest256 leaf_digest;
    std::uint64_t index = 0;
    ProofArtifact artifact;
};

struct MrpProveReply {
    Digest256 root_digest;
    std::vector<ProofArtifact> hops;
    BinaryPath path;
};

/// Remote surface of the CRO prover, as used by the verifier. Implemented
/// in-process for tests and over HTTP against the job service.
class ProverClient {
public:
    virtual ~ProverClient() = default;
    virtual LtrProveReply ltr_prove(const Digest256& h_raw, const Digest256& h_tau) = 0;
    virtual MrpProveReply mrp_prove(const Digest256& h_leaf, std::uint64_t index,
                                    const Bytes& eta) = 0;
};

/// Everything the verifier holds before contacting the prover: the record
/// digest from the PHR, the salt digest from the CRO delivery record, and
/// the published root, keys and default-leaf digest.
struct MembershipContext {
    std::string user_id;
    Digest256 h_raw;
    Digest256 h_tau;
    Digest256 h_root;
    VerificationKey vk_ltr;
    VerificationKey vk_mrp;
    Digest256 default_leaf_digest;
    unsigned tree_height = 16;
};

struct StageOutcome {
    std::string name;
    bool ok = false;
};

struct MembershipReport {
    MembershipVerdict verdict = MembershipVerdict::failed;
    std::vector<StageOutcome> stages;
    std::string detail;
    CsmtProofSet proof_set; // as received; reusable for offline re-verification
};

/// Draws the proof set from the prover (fresh nonce supplied by the caller),
/// checks that the LTR-reported index matches the MRP path, and runs the
/// full inclusion verification.
MembershipReport run_membership_check(const MembershipContext& context, ProverClient& client,
                                      const Bytes& eta);

/// Offline variant over a stored proof set (artifact bundle verification).
MembershipReport verify_stored_proof_set(const MembershipContext& context,
                                         const CsmtProofSet& proof_set, const Bytes& eta);

} // namespace csmt
