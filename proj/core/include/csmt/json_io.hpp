#pragma once

#include "csmt/bulletin.hpp"
#include "csmt/phr.hpp"
#include "csmt/proof.hpp"
#include "csmt/prover.hpp"
#include "csmt/transform.hpp"
#include "csmt/tree.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace csmt::io {

/// Stable field order everywhere so reports and bundles are byte-reproducible.
using json = nlohmann::ordered_json;

inline constexpr int kFileFormatVersion = 1;

json fixed_to_json(const FixedPoint& f);
FixedPoint fixed_from_json(const json& j);

json payload_to_json(const std::vector<FixedPoint>& payload);
std::vector<FixedPoint> payload_from_json(const json& j);

json leaf_to_json(const LeafValue& leaf);
LeafValue leaf_from_json(const json& j);

json circuit_to_json(const CircuitId& circuit);
CircuitId circuit_from_json(const json& j);

json vk_to_json(const VerificationKey& vk);
VerificationKey vk_from_json(const json& j);

json keypair_to_json(const KeyPair& keys);
KeyPair keypair_from_json(const json& j);

json artifact_to_json(const ProofArtifact& artifact);
ProofArtifact artifact_from_json(const json& j);

json audit_path_to_json(const MerkleAuditPath& path);
MerkleAuditPath audit_path_from_json(const json& j);

json bulletin_record_to_json(const BulletinRecord& record);
BulletinRecord bulletin_record_from_json(const json& j);

json proof_set_to_json(const CsmtProofSet& proof_set);
CsmtProofSet proof_set_from_json(const json& j);

json transform_spec_to_json(const TransformSpec& spec);
TransformSpec transform_spec_from_json(const json& j);

/// Versioned tree persistence: config record, occupied (index, leaf) pairs,
/// and the root digest for integrity on load.
json tree_to_json(const Tree& tree);
Tree tree_from_json(const Registry& registry, const json& j);

/// Registry population from a declarative config file:
/// {"transforms": [{id, kind, scale, input_dim, params}], "aggregators": [{id}]}
void registry_load_config(Registry& registry, const json& config);

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

void write_bytes_file(const std::filesystem::path& path, const Bytes& data);
Bytes read_bytes_file(const std::filesystem::path& path);

} // namespace csmt::io
