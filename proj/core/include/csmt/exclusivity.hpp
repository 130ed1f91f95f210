#pragma once

#include "csmt/phr.hpp"
#include "csmt/prover.hpp"
#include "csmt/verifier.hpp"

#include <string>
#include <vector>

namespace csmt {

/// PHR-backed identity of one included participant.
struct AuditMember {
    std::string user_id;
    Digest256 h_raw;
    Digest256 h_tau;
    MerkleAuditPath phr_path;
};

/// Everything the auditor needs to check that no record outside the
/// declared cohort contributed to the committed reduction.
struct AuditBundle {
    Digest256 phr_root;
    Digest256 root_digest; // tree under audit
    Bytes eta;             // session nonce the bundled proof sets were drawn with
    std::vector<AuditMember> included;                          // H^inc
    std::vector<Digest256> claimed_leaves;                      // T: non-default leaves the CRO claims
    std::vector<std::pair<std::string, CsmtProofSet>> proof_sets; // user -> inclusion set
};

enum class AuditStatus {
    pass,
    spurious_leaf,      // "spurious leaf existence detected"
    incomplete_bundle,  // a claimed leaf has no proof set
    invalid_bundle,     // a bundled proof set does not verify at all
};

const char* audit_status_name(AuditStatus status) noexcept;

struct AuditOutcome {
    AuditStatus status = AuditStatus::invalid_bundle;
    std::string detail;

    bool ok() const { return status == AuditStatus::pass; }
};

/// Provenance-and-coverage audit: every bundled LTR must trace to a
/// PHR-registered tuple, the walked proof sets must cover exactly the
/// claimed non-default leaves, and every encountered node without a leaf
/// descendant must be a default node at its level.
AuditOutcome verify_data_exclusivity(const AuditBundle& bundle, const VerificationKey& vk_ltr,
                                     const VerificationKey& vk_mrp,
                                     const std::vector<Digest256>& default_level_digests);

} // namespace csmt
