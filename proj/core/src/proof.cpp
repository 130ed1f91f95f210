#include "csmt/proof.hpp"

#include "csmt/errors.hpp"
#include "csmt/serialize.hpp"
#include "csmt/statistic_kernels.hpp"

#include <algorithm>

namespace csmt {

const char* circuit_kind_name(CircuitKind kind) noexcept {
    switch (kind) {
        case CircuitKind::ltr: return "ltr";
        case CircuitKind::mrp: return "mrp";
        case CircuitKind::post: return "post";
    }
    return "unknown";
}

const char* verify_failure_name(VerifyFailure reason) noexcept {
    switch (reason) {
        case VerifyFailure::none: return "none";
        case VerifyFailure::bad_binding: return "bad-binding";
        case VerifyFailure::field_mismatch: return "field-mismatch";
        case VerifyFailure::unknown_circuit: return "unknown-circuit";
    }
    return "unknown";
}

Bytes CircuitId::canonical() const {
    CanonicalWriter w;
    w.add_u8(std::uint8_t(kind));
    w.add_string(ref_id);
    w.add_digest(params_digest);
    w.add_u32(scale);
    return w.take();
}

Digest256 CircuitId::digest() const { return hash_node(canonical()); }

Bytes VerificationKey::canonical() const {
    CanonicalWriter w;
    w.add_bytes(circuit.canonical());
    w.add_digest(binding);
    return w.take();
}

Digest256 VerificationKey::fingerprint() const { return hash_node(canonical()); }

VerificationKey vk_from_pk(const ProvingKey& pk) {
    CanonicalWriter w;
    w.add_string("vk-binding");
    w.add_bytes(pk.circuit.canonical());
    w.add_bytes(pk.secret_seed);
    return VerificationKey{pk.circuit, hash_node(w.bytes())};
}

const Digest256* ProofArtifact::find(std::string_view name) const {
    for (const PublicField& f : publics) {
        if (f.name == name) return &f.value;
    }
    return nullptr;
}

const Digest256& ProofArtifact::at(std::string_view name) const {
    const Digest256* d = find(name);
    if (!d) raise(errc::not_found, "artifact has no public field '" + std::string(name) + "'");
    return *d;
}

Digest256 compute_binding(const VerificationKey& vk, const std::vector<PublicField>& publics) {
    CanonicalWriter w;
    w.add_digest(vk.fingerprint());
    for (const PublicField& f : publics) {
        w.add_string(f.name);
        w.add_digest(f.value);
    }
    return hash_node(w.bytes());
}

Digest256 WitnessNode::digest() const {
    if (tau) return leaf_digest(LeafValue{payload, *tau});
    return payload_digest(payload);
}

TranscriptBackend::TranscriptBackend(const Registry& registry, Bytes deployment_seed)
    : registry_(registry), deployment_seed_(std::move(deployment_seed)) {}

KeyPair TranscriptBackend::setup(const CircuitId& circuit, unsigned lambda) const {
    check_registered(circuit);
    if (lambda < 8 || lambda % 8 != 0 || lambda > 4096) {
        raise(errc::bad_request, "lambda must be a byte-aligned parameter in [8, 4096]");
    }
    const std::size_t seed_len = lambda / 8;
    Bytes seed;
    seed.reserve(seed_len);
    std::uint32_t counter = 0;
    while (seed.size() < seed_len) {
        CanonicalWriter w;
        w.add_string("backend-seed");
        w.add_bytes(deployment_seed_);
        w.add_digest(circuit.digest());
        w.add_u32(lambda);
        w.add_u32(counter++);
        Digest256 block = hash_node(w.bytes());
        const std::size_t take = std::min<std::size_t>(block.bytes.size(), seed_len - seed.size());
        seed.insert(seed.end(), block.bytes.begin(), block.bytes.begin() + long(take));
    }
    ProvingKey pk{circuit, std::move(seed)};
    VerificationKey vk = vk_from_pk(pk);
    return KeyPair{std::move(pk), std::move(vk)};
}

void TranscriptBackend::check_registered(const CircuitId& circuit) const {
    switch (circuit.kind) {
        case CircuitKind::ltr: {
            if (!registry_.has_transform(circuit.ref_id)) {
                raise(errc::unknown_circuit, "transform '" + circuit.ref_id + "' not registered");
            }
            const TransformSpec& spec = registry_.transform(circuit.ref_id);
            if (transform_params_digest(spec) != circuit.params_digest || spec.scale != circuit.scale) {
                raise(errc::unknown_circuit, "circuit parameters do not match registered transform");
            }
            break;
        }
        case CircuitKind::mrp: {
            if (!registry_.has_aggregator(circuit.ref_id)) {
                raise(errc::unknown_circuit, "aggregator '" + circuit.ref_id + "' not registered");
            }
            const AggregatorSpec& spec = registry_.aggregator(circuit.ref_id);
            if (aggregator_params_digest(spec) != circuit.params_digest) {
                raise(errc::unknown_circuit, "circuit parameters do not match registered aggregator");
            }
            break;
        }
        case CircuitKind::post: {
            if (circuit.ref_id != kPostMaxAbsGapId && circuit.ref_id != kPostLrtStatId &&
                circuit.ref_id != kPostAccRatioId) {
                raise(errc::unknown_circuit, "post circuit '" + circuit.ref_id + "' unknown");
            }
            break;
        }
    }
}

CircuitId TranscriptBackend::ltr_circuit(const std::string& transform_id) const {
    const TransformSpec& spec = registry_.transform(transform_id);
    return CircuitId{CircuitKind::ltr, transform_id, transform_params_digest(spec), spec.scale};
}

CircuitId TranscriptBackend::mrp_circuit(const std::string& aggregator_id, unsigned scale) const {
    const AggregatorSpec& spec = registry_.aggregator(aggregator_id);
    return CircuitId{CircuitKind::mrp, aggregator_id, aggregator_params_digest(spec), scale};
}

CircuitId TranscriptBackend::post_circuit(PostKind kind, unsigned scale) {
    const char* id = kind == PostKind::max_abs_gap ? kPostMaxAbsGapId
                     : kind == PostKind::lrt_stat  ? kPostLrtStatId
                                                   : kPostAccRatioId;
    CanonicalWriter w; // post circuits carry no parameters
    return CircuitId{CircuitKind::post, id, hash_node(w.bytes()), scale};
}

std::vector<PublicField> TranscriptBackend::execute(const CircuitId& circuit,
                                                    const Witness& witness) const {
    check_registered(circuit);
    switch (circuit.kind) {
        case CircuitKind::ltr: {
            const LtrWitness* w = std::get_if<LtrWitness>(&witness);
            if (!w) raise(errc::key_kind, "LTR circuit requires an LTR witness");
            const TransformSpec& spec = registry_.transform(circuit.ref_id);
            const LeafValue leaf = apply_salted_transform(spec, w->datum, w->mu, w->tau);
            return {
                {fields::kInput1, record_digest(w->datum, w->mu)},
                {fields::kInput2, tau_digest(w->tau)},
                {fields::kOutput, leaf_digest(leaf)},
            };
        }
        case CircuitKind::mrp: {
            const MrpWitness* w = std::get_if<MrpWitness>(&witness);
            if (!w) raise(errc::key_kind, "MRP circuit requires an MRP witness");
            const AggregatorSpec& spec = registry_.aggregator(circuit.ref_id);
            const NodeValue parent =
                aggregate_pair(spec, NodeValue{w->left.payload, w->left.digest()},
                               NodeValue{w->right.payload, w->right.digest()});
            return {
                {fields::kLeftInput, w->left.digest()},
                {fields::kRightInput, w->right.digest()},
                {fields::kParent, parent.digest},
                {fields::kBit, hash_bit(w->bit)},
                {fields::kNonce, hash_node(w->nonce)},
            };
        }
        case CircuitKind::post: {
            const PostWitness* w = std::get_if<PostWitness>(&witness);
            if (!w) raise(errc::key_kind, "post circuit requires a post witness");
            FixedPoint zeta;
            const char* name_a = fields::kInputA;
            const char* name_b = fields::kInputB;
            if (circuit.ref_id == kPostMaxAbsGapId) {
                zeta = max_absolute_gap(w->input_a, w->input_b);
            } else if (circuit.ref_id == kPostLrtStatId) {
                if (w->input_a.size() != 1 || w->input_b.size() != 1) {
                    raise(errc::shape_mismatch, "LRT post inputs must be scalars");
                }
                zeta = lrt_statistic(w->input_a[0], w->input_b[0]);
            } else {
                if (w->input_a.size() != 1 || w->input_b.size() != 1) {
                    raise(errc::shape_mismatch, "accuracy post inputs must be scalars");
                }
                zeta = accuracy_ratio(w->input_a[0], w->input_b[0]);
            }
            const FixedPoint out[1] = {zeta};
            return {
                {name_a, payload_digest(w->input_a)},
                {name_b, payload_digest(w->input_b)},
                {fields::kOutput, payload_digest(out)},
            };
        }
    }
    raise(errc::unknown_circuit, "unhandled circuit kind");
}

ProofArtifact TranscriptBackend::prove(const ProvingKey& pk, const Witness& witness,
                                       const std::vector<PublicField>& publics) const {
    const std::vector<PublicField> expected = execute(pk.circuit, witness);
    if (publics.size() != expected.size()) {
        raise(errc::witness_mismatch, "claimed publics do not match circuit outputs");
    }
    for (std::size_t i = 0; i < publics.size(); ++i) {
        if (publics[i].name != expected[i].name) {
            raise(errc::witness_mismatch, "public field '" + publics[i].name + "' out of order");
        }
        if (publics[i].value != expected[i].value) {
            raise(errc::witness_mismatch,
                  "public field '" + publics[i].name + "' disagrees with the witness");
        }
    }
    return ProofArtifact{pk.circuit, publics, compute_binding(vk_from_pk(pk), publics)};
}

VerificationOutcome TranscriptBackend::verify(const VerificationKey& vk,
                                              const ProofArtifact& artifact) {
    if (!(artifact.circuit == vk.circuit)) {
        return VerificationOutcome{false, VerifyFailure::unknown_circuit};
    }
    if (compute_binding(vk, artifact.publics) != artifact.binding) {
        return VerificationOutcome{false, VerifyFailure::bad_binding};
    }
    return VerificationOutcome{true, VerifyFailure::none};
}

} // namespace csmt
