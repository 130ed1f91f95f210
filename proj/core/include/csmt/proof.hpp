#pragma once

#include "csmt/digest.hpp"
#include "csmt/salt.hpp"
#include "csmt/transform.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace csmt {

enum class CircuitKind : std::uint8_t { ltr = 0, mrp = 1, post = 2 };

const char* circuit_kind_name(CircuitKind kind) noexcept;

enum class PostKind { max_abs_gap, lrt_stat, acc_ratio };

inline constexpr const char* kPostMaxAbsGapId = "max_abs_gap";
inline constexpr const char* kPostLrtStatId = "lrt_stat";
inline constexpr const char* kPostAccRatioId = "acc_ratio";

struct CircuitId {
    CircuitKind kind = CircuitKind::ltr;
    std::string ref_id;           // transform, aggregator, or post-circuit id
    Digest256 params_digest;      // recomputable from the registered spec
    unsigned scale = 8;

    bool operator==(const CircuitId&) const = default;

    Bytes canonical() const;
    Digest256 digest() const;
};

struct ProvingKey {
    CircuitId circuit;
    Bytes secret_seed; // lambda/8 bytes; never leaves the prover
};

struct VerificationKey {
    CircuitId circuit;
    Digest256 binding;

    bool operator==(const VerificationKey&) const = default;

    Bytes canonical() const;
    Digest256 fingerprint() const;
};

struct KeyPair {
    ProvingKey pk;
    VerificationKey vk;
};

VerificationKey vk_from_pk(const ProvingKey& pk);

struct PublicField {
    std::string name;
    Digest256 value;

    bool operator==(const PublicField&) const = default;
};

/// Tamper-evident transcript of one circuit execution. Carries only named
/// public digests and a binding tag; no witness bytes are present.
struct ProofArtifact {
    CircuitId circuit;
    std::vector<PublicField> publics;
    Digest256 binding;

    bool operator==(const ProofArtifact&) const = default;

    const Digest256* find(std::string_view name) const;
    const Digest256& at(std::string_view name) const;
};

Digest256 compute_binding(const VerificationKey& vk, const std::vector<PublicField>& publics);

enum class VerifyFailure { none, bad_binding, field_mismatch, unknown_circuit };

const char* verify_failure_name(VerifyFailure reason) noexcept;

struct VerificationOutcome {
    bool ok = false;
    VerifyFailure reason = VerifyFailure::none;
};

// --- Witness shapes ------------------------------------------------------

struct LtrWitness {
    std::vector<double> datum;
    UserSalt mu;
    TransformSalt tau;
};

/// One child value presented to an aggregation hop. Leaf-level children
/// carry their tau tag so the backend can recompute the salted leaf digest.
struct WitnessNode {
    std::vector<FixedPoint> payload;
    std::optional<TransformSalt> tau;

    Digest256 digest() const;
};

struct MrpWitness {
    WitnessNode left;
    WitnessNode right;
    bool bit = false;
    Bytes nonce;
};

struct PostWitness {
    PostKind kind = PostKind::max_abs_gap;
    std::vector<FixedPoint> input_a; // count/loglik payload of the first tree
    std::vector<FixedPoint> input_b; // second tree
};

using Witness = std::variant<LtrWitness, MrpWitness, PostWitness>;

// --- Public field name schemas -------------------------------------------

namespace fields {
inline constexpr const char* kInput1 = "Input1";
inline constexpr const char* kInput2 = "Input2";
inline constexpr const char* kOutput = "Output";
inline constexpr const char* kLeftInput = "LeftInput";
inline constexpr const char* kRightInput = "RightInput";
inline constexpr const char* kParent = "Parent";
inline constexpr const char* kBit = "Bit";
inline constexpr const char* kNonce = "Nonce";
inline constexpr const char* kInputA = "InputA";
inline constexpr const char* kInputB = "InputB";
} // namespace fields

/// Reference proof backend: the prover re-executes the circuit on the
/// witness, refuses to sign publics that do not match the computed ones,
/// and emits a binding tag over (vk, publics). The Setup/Prove/Verify
/// surface matches a SNARK backend so one can be dropped in behind it.
class TranscriptBackend {
public:
    static constexpr const char* kBackendName = "reexec-transcript/1";

    TranscriptBackend(const Registry& registry, Bytes deployment_seed);

    /// Deterministic given (circuit, lambda, deployment seed). lambda only
    /// sizes the backend secret (lambda/8 bytes).
    KeyPair setup(const CircuitId& circuit, unsigned lambda = 128) const;

    ProofArtifact prove(const ProvingKey& pk, const Witness& witness,
                        const std::vector<PublicField>& publics) const;

    static VerificationOutcome verify(const VerificationKey& vk, const ProofArtifact& artifact);

    /// Re-execute the circuit and return the public fields it defines.
    std::vector<PublicField> execute(const CircuitId& circuit, const Witness& witness) const;

    CircuitId ltr_circuit(const std::string& transform_id) const;
    CircuitId mrp_circuit(const std::string& aggregator_id, unsigned scale) const;
    static CircuitId post_circuit(PostKind kind, unsigned scale);

    const Registry& registry() const { return registry_; }

private:
    void check_registered(const CircuitId& circuit) const;

    const Registry& registry_;
    Bytes deployment_seed_;
};

} // namespace csmt
