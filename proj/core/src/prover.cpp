#include "csmt/prover.hpp"

#include "csmt/errors.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace csmt {

StudyProver::StudyProver(const Registry& registry, TranscriptBackend& backend, PhrStore& phr)
    : registry_(registry), backend_(backend), phr_(phr) {}

void StudyProver::register_keys(const KeyPair& keys) {
    keys_[keys.pk.circuit.digest()] = keys;
}

const KeyPair& StudyProver::keys_for(const CircuitId& circuit) const {
    auto it = keys_.find(circuit.digest());
    if (it == keys_.end()) {
        raise(errc::unknown_circuit, "no keys registered for circuit '" + circuit.ref_id + "'");
    }
    return it->second;
}

const KeyPair& StudyProver::keys_for_vk(const VerificationKey& vk) const {
    const KeyPair& keys = keys_for(vk.circuit);
    if (!(keys.vk == vk)) {
        raise(errc::unknown_circuit, "verification key does not match the registered setup");
    }
    return keys;
}

LeafTransformOutcome StudyProver::leaf_transform(const std::string& user_id,
                                                 std::span<const double> datum, const UserSalt& mu,
                                                 const TransformSalt& tau, const TransformSpec& spec,
                                                 unsigned tree_height) {
    const LeafValue leaf = apply_salted_transform(spec, datum, mu, tau);
    LeafTransformOutcome out;
    out.leaf = leaf;
    out.leaf_digest = leaf_digest(leaf);
    out.tau_digest = tau_digest(tau);
    out.index = derive_leaf_index(out.leaf_digest, tree_height);

    const CircuitId circuit{CircuitKind::ltr, spec.id, transform_params_digest(spec), spec.scale};
    LtrWitnessKey key{record_digest(datum, mu), out.tau_digest, circuit.digest()};
    StoredLtrWitness stored;
    stored.user_id = user_id;
    stored.witness = LtrWitness{{datum.begin(), datum.end()}, mu, tau};
    stored.leaf = leaf;
    stored.leaf_digest = out.leaf_digest;
    store_.put_ltr(key, std::move(stored));
    return out;
}

BuildOutcome StudyProver::build_study(const std::string& study_id, const std::string& tree_label,
                                      const CohortSpec& cohort, const TreeConfig& config,
                                      const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                                      CollisionPolicy policy) {
    const KeyPair& ltr_keys = keys_for_vk(vk_ltr);
    const KeyPair& mrp_keys = keys_for_vk(vk_mrp);
    if (ltr_keys.pk.circuit.kind != CircuitKind::ltr) raise(errc::key_kind, "vk_ltr is not an LTR key");
    if (mrp_keys.pk.circuit.kind != CircuitKind::mrp) raise(errc::key_kind, "vk_mrp is not an MRP key");

    const TransformSpec& spec = registry_.transform(ltr_keys.pk.circuit.ref_id);
    if (config.transform_id != spec.id) {
        raise(errc::bad_request, "tree config transform differs from vk_ltr circuit");
    }
    std::set<std::string> included(cohort.included.begin(), cohort.included.end());
    for (const std::string& user : cohort.included) {
        if (std::find(cohort.all_users.begin(), cohort.all_users.end(), user) ==
            cohort.all_users.end()) {
            raise(errc::bad_request, "included user '" + user + "' is not in the cohort user set");
        }
    }

    BuildOutcome out;
    constexpr unsigned kMaxRedraws = 256;
    while (true) {
        std::unordered_map<std::uint64_t, std::string> seen;
        std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
        std::string collided_user;

        out.deliveries.clear();
        for (const std::string& user : cohort.all_users) {
            const PhrRecord& record = phr_.record(user);
            const LeafTransformOutcome leaf =
                leaf_transform(user, record.datum, record.mu, record.tau, spec, config.height);
            const std::uint64_t index = leaf.index.value();
            auto [it, inserted] = seen.emplace(index, user);
            if (!inserted) {
                if (policy == CollisionPolicy::fail) {
                    raise(errc::leaf_collision, "users '" + it->second + "' and '" + user +
                                                    "' share leaf index " + std::to_string(index));
                }
                collided_user = user;
                break;
            }
            if (included.count(user)) leaves.emplace_back(index, leaf.leaf);
            out.deliveries.push_back(
                DeliveryRecord{user, record_digest(record.datum, record.mu), leaf.tau_digest});
        }
        if (!collided_user.empty()) {
            if (out.collision_redraws >= kMaxRedraws) {
                raise(errc::leaf_collision, "collision remediation did not converge; raise the tree height");
            }
            phr_.redraw_transform_salt(collided_user);
            ++out.collision_redraws;
            continue;
        }

        auto tree = std::make_shared<Tree>(Tree::build(registry_, config, leaves));
        out.root = tree->root();
        out.root_digest = tree->root_digest();
        store_.put_tree(StoredTree{study_id, tree_label, ltr_keys.pk.circuit, mrp_keys.pk.circuit,
                                   std::move(tree)});
        return out;
    }
}

LtrProveOutcome StudyProver::ltr_prove(const Digest256& h_raw, const Digest256& h_tau,
                                       const VerificationKey& vk_ltr, unsigned tree_height) const {
    const KeyPair& keys = keys_for_vk(vk_ltr);
    if (keys.pk.circuit.kind != CircuitKind::ltr) raise(errc::key_kind, "vk is not an LTR key");

    const LtrWitnessKey key{h_raw, h_tau, keys.pk.circuit.digest()};
    const StoredLtrWitness* stored = store_.find_ltr(key);
    if (!stored) {
        raise(errc::not_found, "no leaf-transform witness for the requested record digests");
    }
    const std::vector<PublicField> publics{
        {fields::kInput1, h_raw},
        {fields::kInput2, h_tau},
        {fields::kOutput, stored->leaf_digest},
    };
    LtrProveOutcome out;
    out.leaf_digest = stored->leaf_digest;
    out.index = derive_leaf_index(stored->leaf_digest, tree_height);
    out.artifact = backend_.prove(keys.pk, stored->witness, publics);
    return out;
}

MrpProveOutcome StudyProver::mrp_prove(const Digest256& h_leaf, const LeafIndex& index,
                                       const Bytes& eta, const VerificationKey& vk_mrp,
                                       const Digest256& root_digest) const {
    const KeyPair& keys = keys_for_vk(vk_mrp);
    if (keys.pk.circuit.kind != CircuitKind::mrp) raise(errc::key_kind, "vk is not an MRP key");
    if (eta.size() != kSaltLen) raise(errc::bad_request, "session nonce must be 16 bytes");

    const StoredTree* stored = store_.find_tree(root_digest);
    if (!stored) raise(errc::not_built, "no tree built under the requested root digest");
    if (!(stored->mrp_circuit == keys.pk.circuit)) {
        raise(errc::unknown_circuit, "tree was built for a different aggregation circuit");
    }
    const Tree& tree = *stored->tree;
    const unsigned K = tree.height();
    if (index.height() != K) raise(errc::index_mismatch, "index height differs from tree height");
    if (!(derive_leaf_index(h_leaf, K) == index)) {
        raise(errc::index_mismatch, "index is not the derived index of the leaf digest");
    }

    const std::uint64_t position = index.value();
    auto witness_node = [&](unsigned level, std::uint64_t pos) {
        const NodeValue& node = tree.node_at(level, pos);
        WitnessNode w;
        w.payload = node.payload;
        if (level == 0) {
            auto it = tree.occupied().find(pos);
            w.tau = (it != tree.occupied().end()) ? it->second.tau : TransformSalt{};
        }
        return w;
    };

    MrpProveOutcome out;
    out.root_digest = tree.root_digest();
    out.path = index_to_path(index);
    out.hops.reserve(K);
    for (unsigned k = 0; k < K; ++k) {
        const std::uint64_t pos = position >> k;
        const std::uint64_t parent = pos >> 1;
        const bool bit = pos & 1;
        MrpWitness witness{witness_node(k, parent * 2), witness_node(k, parent * 2 + 1), bit, eta};
        const std::vector<PublicField> publics{
            {fields::kLeftInput, tree.node_at(k, parent * 2).digest},
            {fields::kRightInput, tree.node_at(k, parent * 2 + 1).digest},
            {fields::kParent, tree.node_at(k + 1, parent).digest},
            {fields::kBit, hash_bit(bit)},
            {fields::kNonce, hash_node(eta)},
        };
        out.hops.push_back(backend_.prove(keys.pk, witness, publics));
    }
    return out;
}

CsmtProofSet StudyProver::prove_set(const Digest256& h_raw, const Digest256& h_tau, const Bytes& eta,
                                    const VerificationKey& vk_ltr, const VerificationKey& vk_mrp,
                                    const Digest256& root_digest) const {
    const StoredTree* stored = store_.find_tree(root_digest);
    if (!stored) raise(errc::not_built, "no tree built under the requested root digest");
    const unsigned K = stored->tree->height();

    const LtrProveOutcome ltr = ltr_prove(h_raw, h_tau, vk_ltr, K);
    const MrpProveOutcome mrp = mrp_prove(ltr.leaf_digest, ltr.index, eta, vk_mrp, root_digest);
    return CsmtProofSet{ltr.artifact, mrp.hops, mrp.path, mrp.root_digest};
}

} // namespace csmt
