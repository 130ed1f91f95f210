#include "csmt/exclusivity.hpp"

#include "csmt/errors.hpp"

#include <map>
#include <set>

namespace csmt {

const char* audit_status_name(AuditStatus status) noexcept {
    switch (status) {
        case AuditStatus::pass: return "pass";
        case AuditStatus::spurious_leaf: return "spurious leaf existence detected";
        case AuditStatus::incomplete_bundle: return "incomplete-bundle";
        case AuditStatus::invalid_bundle: return "invalid-bundle";
    }
    return "unknown";
}

namespace {

struct NodeEntry {
    Digest256 digest;
    unsigned level = 0;
    std::set<Digest256> leaves;
};

using NodeKey = std::pair<unsigned, std::uint64_t>; // (level, position)

} // namespace

AuditOutcome verify_data_exclusivity(const AuditBundle& bundle, const VerificationKey& vk_ltr,
                                     const VerificationKey& vk_mrp,
                                     const std::vector<Digest256>& default_level_digests) {
    if (default_level_digests.size() < 2) {
        raise(errc::bad_request, "default chain must cover every level");
    }
    const unsigned K = unsigned(default_level_digests.size() - 1);
    const Digest256& default_leaf = default_level_digests[0];
    const Digest256 h_eta = hash_node(bundle.eta);

    std::map<std::pair<Digest256, Digest256>, const AuditMember*> members;
    for (const AuditMember& m : bundle.included) members[{m.h_raw, m.h_tau}] = &m;

    // 1. LTR provenance: each proof set must chain to the root, and its
    //    record tuple must be PHR-registered among the declared members.
    std::set<Digest256> nodes_ltr;
    std::set<Digest256> walked_leaves;
    std::map<NodeKey, NodeEntry> nodes;

    auto touch = [&](unsigned level, std::uint64_t position, const Digest256& digest) -> NodeEntry* {
        auto [it, inserted] = nodes.try_emplace(NodeKey{level, position});
        if (inserted) {
            it->second.digest = digest;
            it->second.level = level;
        } else if (!(it->second.digest == digest)) {
            return nullptr; // two proof sets disagree on the same node
        }
        return &it->second;
    };

    for (const auto& [user_id, proof_set] : bundle.proof_sets) {
        if (proof_set.mrp_hops.size() != K) {
            return {AuditStatus::invalid_bundle, "proof set for '" + user_id + "' has wrong hop count"};
        }
        const Digest256* h_raw = proof_set.ltr.find(fields::kInput1);
        const Digest256* h_tau = proof_set.ltr.find(fields::kInput2);
        const Digest256* h_leaf = proof_set.ltr.find(fields::kOutput);
        if (!h_raw || !h_tau || !h_leaf) {
            return {AuditStatus::invalid_bundle, "proof set for '" + user_id + "' misses LTR fields"};
        }
        const VerIncResult inc = ver_inc(*h_raw, *h_tau, *h_leaf, proof_set, bundle.root_digest,
                                         h_eta, vk_ltr, vk_mrp, default_leaf);
        if (inc.verdict != MembershipVerdict::included) {
            return {AuditStatus::invalid_bundle,
                    "proof set for '" + user_id + "' is not a verifying inclusion set"};
        }

        bool provenance_ok = false;
        auto member = members.find({*h_raw, *h_tau});
        if (member != members.end()) {
            const MerkleAuditPath& path = member->second->phr_path;
            provenance_ok = path.leaf_digest == phr_leaf_digest(*h_raw, *h_tau) &&
                            phr_verify_membership(bundle.phr_root, path);
        }
        if (provenance_ok) nodes_ltr.insert(*h_leaf);

        // 2. walk the hops, keyed by tree position, collecting per-node
        //    leaf-descendant sets
        const LeafIndex index = derive_leaf_index(*h_leaf, K);
        const std::uint64_t idx = index.value();
        walked_leaves.insert(*h_leaf);
        NodeEntry* leaf_entry = touch(0, idx, *h_leaf);
        if (!leaf_entry) return {AuditStatus::spurious_leaf, "conflicting leaf content at index"};
        leaf_entry->leaves.insert(*h_leaf);

        for (unsigned k = 0; k < K; ++k) {
            const std::uint64_t pos = idx >> k;
            const bool bit = pos & 1;
            const Digest256& sibling =
                proof_set.mrp_hops[k].at(bit ? fields::kLeftInput : fields::kRightInput);
            const Digest256& parent = proof_set.mrp_hops[k].at(fields::kParent);
            if (!touch(k, pos ^ 1, sibling)) {
                return {AuditStatus::spurious_leaf, "conflicting sibling content at level " +
                                                        std::to_string(k)};
            }
            NodeEntry* parent_entry = touch(k + 1, pos >> 1, parent);
            if (!parent_entry) {
                return {AuditStatus::spurious_leaf,
                        "conflicting parent content at level " + std::to_string(k + 1)};
            }
            parent_entry->leaves.insert(*h_leaf);
        }
    }

    // every claimed non-default leaf needs a covering proof set
    for (const Digest256& claimed : bundle.claimed_leaves) {
        if (!walked_leaves.count(claimed)) {
            return {AuditStatus::incomplete_bundle,
                    "claimed leaf " + claimed.hex().substr(0, 16) + "... has no proof set"};
        }
    }

    // each walked leaf must result from a PHR-registered raw data record
    if (walked_leaves != nodes_ltr) {
        return {AuditStatus::spurious_leaf, "a walked leaf has no PHR-backed LTR provenance"};
    }

    // each encountered node without a leaf descendant must be the default
    // node of its level
    for (const auto& [key, entry] : nodes) {
        if (entry.leaves.empty() && !(entry.digest == default_level_digests[entry.level])) {
            return {AuditStatus::spurious_leaf, "non-default node without leaf descendants at level " +
                                                    std::to_string(entry.level)};
        }
    }
    return {AuditStatus::pass, {}};
}

} // namespace csmt
