#include "csmt/verifier.hpp"

#include "csmt/errors.hpp"

namespace csmt {

const char* membership_verdict_name(MembershipVerdict verdict) noexcept {
    switch (verdict) {
        case MembershipVerdict::included: return "verified-inclusion";
        case MembershipVerdict::excluded: return "verified-exclusion";
        case MembershipVerdict::failed: return "failed";
    }
    return "unknown";
}

CheckResult ltr_verify(const VerificationKey& vk_ltr, const ProofArtifact& artifact,
                       const Digest256& h_raw, const Digest256& h_tau, const Digest256& h_leaf) {
    const VerificationOutcome zk = TranscriptBackend::verify(vk_ltr, artifact);
    if (!zk.ok) return {false, std::string("backend: ") + verify_failure_name(zk.reason)};
    const Digest256* input1 = artifact.find(fields::kInput1);
    const Digest256* input2 = artifact.find(fields::kInput2);
    const Digest256* output = artifact.find(fields::kOutput);
    if (!input1 || !input2 || !output) return {false, "missing public field"};
    if (!(*input1 == h_raw)) return {false, "user data digest mismatch"};
    if (!(*input2 == h_tau)) return {false, "transform salt digest mismatch"};
    if (!(*output == h_leaf)) return {false, "leaf digest mismatch"};
    return {true, {}};
}

CheckResult mrp_hop_verify(const VerificationKey& vk_mrp, const ProofArtifact& artifact,
                           const Digest256& h_left, const Digest256& h_right,
                           const Digest256& h_bit, const Digest256& h_eta) {
    const VerificationOutcome zk = TranscriptBackend::verify(vk_mrp, artifact);
    if (!zk.ok) return {false, std::string("backend: ") + verify_failure_name(zk.reason)};
    const Digest256* left = artifact.find(fields::kLeftInput);
    const Digest256* right = artifact.find(fields::kRightInput);
    const Digest256* bit = artifact.find(fields::kBit);
    const Digest256* nonce = artifact.find(fields::kNonce);
    if (!left || !right || !bit || !nonce || !artifact.find(fields::kParent)) {
        return {false, "missing public field"};
    }
    if (!(*left == h_left)) return {false, "left input mismatch"};
    if (!(*right == h_right)) return {false, "right input mismatch"};
    if (!(*bit == h_bit)) return {false, "selector bit mismatch"};
    if (!(*nonce == h_eta)) return {false, "nonce mismatch"};
    return {true, {}};
}

VerIncResult ver_inc(const Digest256& h_raw, const Digest256& h_tau, const Digest256& h_leaf,
                     const CsmtProofSet& proof_set, const Digest256& h_root, const Digest256& h_eta,
                     const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                     const Digest256& default_leaf_digest) {
    VerIncResult result;

    const CheckResult ltr = ltr_verify(vk_ltr, proof_set.ltr, h_raw, h_tau, h_leaf);
    if (!ltr.ok) {
        result.failed_stage = "ltr";
        result.detail = ltr.reason;
        return result;
    }

    const unsigned K = unsigned(proof_set.mrp_hops.size());
    if (K == 0 || K > 64) {
        result.failed_stage = "path";
        result.detail = "hop count out of range";
        return result;
    }
    const LeafIndex index = derive_leaf_index(h_leaf, K);
    if (!(proof_set.path == index_to_path(index))) {
        result.failed_stage = "path";
        result.detail = "proof-set path differs from the index derived from the leaf digest";
        return result;
    }

    // hop 0's path-side input decides between inclusion and exclusion
    const bool bit0 = index.branch_bit_at_level(0);
    const Digest256* start =
        proof_set.mrp_hops[0].find(bit0 ? fields::kRightInput : fields::kLeftInput);
    if (!start) {
        result.failed_stage = "leaf-binding";
        result.detail = "hop 0 misses its path-side input";
        return result;
    }
    bool excluded = false;
    if (*start == h_leaf) {
        excluded = false;
    } else if (*start == default_leaf_digest) {
        excluded = true;
    } else {
        result.failed_stage = "leaf-binding";
        result.detail = "hop 0 path-side input is neither the leaf nor the default element";
        return result;
    }

    Digest256 current = *start;
    for (unsigned k = 0; k < K; ++k) {
        const ProofArtifact& hop = proof_set.mrp_hops[k];
        const bool bit = index.branch_bit_at_level(k);
        Digest256 h_left;
        Digest256 h_right;
        if (bit) {
            const Digest256* sibling = hop.find(fields::kLeftInput);
            if (!sibling) {
                result.failed_stage = "hop";
                result.failed_hop = int(k);
                result.detail = "missing sibling field";
                return result;
            }
            h_left = *sibling;
            h_right = current;
        } else {
            const Digest256* sibling = hop.find(fields::kRightInput);
            if (!sibling) {
                result.failed_stage = "hop";
                result.failed_hop = int(k);
                result.detail = "missing sibling field";
                return result;
            }
            h_left = current;
            h_right = *sibling;
        }
        const CheckResult check = mrp_hop_verify(vk_mrp, hop, h_left, h_right, hash_bit(bit), h_eta);
        if (!check.ok) {
            result.failed_stage = "hop";
            result.failed_hop = int(k);
            result.detail = check.reason;
            return result;
        }
        current = hop.at(fields::kParent);
    }

    if (!(current == h_root)) {
        result.failed_stage = "root";
        result.detail = "chained digest does not reach the published root";
        return result;
    }
    result.verdict = excluded ? MembershipVerdict::excluded : MembershipVerdict::included;
    return result;
}

namespace {

MembershipReport finish_with_ver_inc(const MembershipContext& context, MembershipReport report,
                                     const CsmtProofSet& proof_set, const Digest256& h_eta) {
    const Digest256* h_leaf = proof_set.ltr.find(fields::kOutput);
    // the hop count must match the published tree height; a shortened chain
    // could otherwise terminate at an interior node with a matching digest
    if (h_leaf && proof_set.mrp_hops.size() != context.tree_height) {
        report.stages.push_back({"ltr", true});
        report.stages.push_back({"path", false});
        report.stages.push_back({"hops", false});
        report.stages.push_back({"root", false});
        report.verdict = MembershipVerdict::failed;
        report.detail = "path: proof set has " + std::to_string(proof_set.mrp_hops.size()) +
                        " hops, the study's tree height is " + std::to_string(context.tree_height);
        report.proof_set = proof_set;
        return report;
    }
    if (!h_leaf) {
        report.stages.push_back({"ltr", false});
        report.stages.push_back({"path", false});
        report.stages.push_back({"hops", false});
        report.stages.push_back({"root", false});
        report.verdict = MembershipVerdict::failed;
        report.detail = "ltr: artifact misses its output field";
        report.proof_set = proof_set;
        return report;
    }
    const VerIncResult inc =
        ver_inc(context.h_raw, context.h_tau, *h_leaf, proof_set, context.h_root, h_eta,
                context.vk_ltr, context.vk_mrp, context.default_leaf_digest);
    const bool ok = inc.verdict != MembershipVerdict::failed;
    report.stages.push_back({"ltr", ok || inc.failed_stage != "ltr"});
    report.stages.push_back({"path", ok || (inc.failed_stage != "path" && inc.failed_stage != "leaf-binding")});
    report.stages.push_back({"hops", ok || inc.failed_stage != "hop"});
    report.stages.push_back({"root", ok || inc.failed_stage != "root"});
    report.verdict = inc.verdict;
    if (!ok) {
        report.detail = inc.failed_stage +
                        (inc.failed_hop >= 0 ? "[" + std::to_string(inc.failed_hop) + "]" : "") +
                        ": " + inc.detail;
    }
    report.proof_set = proof_set;
    return report;
}

} // namespace

MembershipReport run_membership_check(const MembershipContext& context, ProverClient& client,
                                      const Bytes& eta) {
    MembershipReport report;
    LtrProveReply ltr;
    try {
        ltr = client.ltr_prove(context.h_raw, context.h_tau);
        report.stages.push_back({"ltr-prove", true});
    } catch (const Error& e) {
        report.stages.push_back({"ltr-prove", false});
        report.detail = e.what();
        report.verdict = MembershipVerdict::failed;
        return report;
    }

    // LTR-reported index must match the index derived from the leaf digest
    const LeafIndex derived = derive_leaf_index(ltr.leaf_digest, context.tree_height);
    if (derived.value() != ltr.index) {
        report.stages.push_back({"index-consistency", false});
        report.detail = "prover-reported index differs from the derived index";
        report.verdict = MembershipVerdict::failed;
        return report;
    }
    report.stages.push_back({"index-consistency", true});

    MrpProveReply mrp;
    try {
        mrp = client.mrp_prove(ltr.leaf_digest, ltr.index, eta);
        report.stages.push_back({"mrp-prove", true});
    } catch (const Error& e) {
        report.stages.push_back({"mrp-prove", false});
        report.detail = e.what();
        report.verdict = MembershipVerdict::failed;
        return report;
    }
    if (!(mrp.path == index_to_path(derived))) {
        report.stages.push_back({"path-consistency", false});
        report.detail = "MRP path differs from the LTR-reported leaf";
        report.verdict = MembershipVerdict::failed;
        return report;
    }
    report.stages.push_back({"path-consistency", true});

    CsmtProofSet proof_set{ltr.artifact, mrp.hops, mrp.path, mrp.root_digest};
    return finish_with_ver_inc(context, std::move(report), proof_set, hash_node(eta));
}

MembershipReport verify_stored_proof_set(const MembershipContext& context,
                                         const CsmtProofSet& proof_set, const Bytes& eta) {
    MembershipReport report;
    report.stages.push_back({"ltr-prove", true});
    report.stages.push_back({"index-consistency", true});
    report.stages.push_back({"mrp-prove", true});
    report.stages.push_back({"path-consistency", proof_set.path.size() != 0});
    if (proof_set.path.size() == 0) {
        report.verdict = MembershipVerdict::failed;
        report.detail = "stored proof set has no path";
        return report;
    }
    return finish_with_ver_inc(context, std::move(report), proof_set, hash_node(eta));
}

} // namespace csmt
