#include "csmt/json_io.hpp"

#include "csmt/errors.hpp"

#include <fstream>

namespace csmt::io {

namespace {

SaltBytes salt_from_hex(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != kSaltLen) raise(errc::bad_request, "salt must be 16 bytes");
    SaltBytes out;
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

} // namespace

json fixed_to_json(const FixedPoint& f) { return json{{"raw", f.raw}, {"scale", f.scale}}; }

FixedPoint fixed_from_json(const json& j) {
    return FixedPoint{j.at("raw").get<std::int64_t>(), j.at("scale").get<std::uint8_t>()};
}

json payload_to_json(const std::vector<FixedPoint>& payload) {
    json arr = json::array();
    for (const FixedPoint& f : payload) arr.push_back(fixed_to_json(f));
    return arr;
}

std::vector<FixedPoint> payload_from_json(const json& j) {
    std::vector<FixedPoint> out;
    out.reserve(j.size());
    for (const json& e : j) out.push_back(fixed_from_json(e));
    return out;
}

json leaf_to_json(const LeafValue& leaf) {
    return json{{"payload", payload_to_json(leaf.payload)},
                {"tau", to_hex(std::span<const std::uint8_t>(leaf.tau.bytes.data(), kSaltLen))}};
}

LeafValue leaf_from_json(const json& j) {
    LeafValue leaf;
    leaf.payload = payload_from_json(j.at("payload"));
    leaf.tau = TransformSalt{salt_from_hex(j.at("tau").get<std::string>())};
    return leaf;
}

json circuit_to_json(const CircuitId& circuit) {
    return json{{"kind", circuit_kind_name(circuit.kind)},
                {"ref_id", circuit.ref_id},
                {"params_digest", circuit.params_digest.hex()},
                {"scale", circuit.scale}};
}

CircuitId circuit_from_json(const json& j) {
    CircuitId out;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ltr") {
        out.kind = CircuitKind::ltr;
    } else if (kind == "mrp") {
        out.kind = CircuitKind::mrp;
    } else if (kind == "post") {
        out.kind = CircuitKind::post;
    } else {
        raise(errc::bad_request, "unknown circuit kind '" + kind + "'");
    }
    out.ref_id = j.at("ref_id").get<std::string>();
    out.params_digest = Digest256::from_hex(j.at("params_digest").get<std::string>());
    out.scale = j.at("scale").get<unsigned>();
    return out;
}

json vk_to_json(const VerificationKey& vk) {
    return json{{"format_version", kFileFormatVersion},
                {"backend", TranscriptBackend::kBackendName},
                {"circuit", circuit_to_json(vk.circuit)},
                {"binding", vk.binding.hex()}};
}

VerificationKey vk_from_json(const json& j) {
    return VerificationKey{circuit_from_json(j.at("circuit")),
                           Digest256::from_hex(j.at("binding").get<std::string>())};
}

json keypair_to_json(const KeyPair& keys) {
    return json{{"format_version", kFileFormatVersion},
                {"circuit", circuit_to_json(keys.pk.circuit)},
                {"secret_seed", to_hex(std::span<const std::uint8_t>(keys.pk.secret_seed.data(),
                                                                     keys.pk.secret_seed.size()))},
                {"vk", vk_to_json(keys.vk)}};
}

KeyPair keypair_from_json(const json& j) {
    KeyPair keys;
    keys.pk.circuit = circuit_from_json(j.at("circuit"));
    keys.pk.secret_seed = from_hex(j.at("secret_seed").get<std::string>());
    keys.vk = vk_from_json(j.at("vk"));
    return keys;
}

json artifact_to_json(const ProofArtifact& artifact) {
    json publics = json::array();
    for (const PublicField& f : artifact.publics) {
        publics.push_back(json{{"name", f.name}, {"digest", f.value.hex()}});
    }
    return json{{"format_version", kFileFormatVersion},
                {"backend", TranscriptBackend::kBackendName},
                {"circuit", circuit_to_json(artifact.circuit)},
                {"publics", publics},
                {"binding", artifact.binding.hex()}};
}

ProofArtifact artifact_from_json(const json& j) {
    ProofArtifact out;
    out.circuit = circuit_from_json(j.at("circuit"));
    for (const json& f : j.at("publics")) {
        out.publics.push_back(PublicField{f.at("name").get<std::string>(),
                                          Digest256::from_hex(f.at("digest").get<std::string>())});
    }
    out.binding = Digest256::from_hex(j.at("binding").get<std::string>());
    return out;
}

json audit_path_to_json(const MerkleAuditPath& path) {
    json siblings = json::array();
    for (const Digest256& d : path.siblings) siblings.push_back(d.hex());
    json directions = json::array();
    for (std::uint8_t b : path.directions) directions.push_back(int(b));
    return json{{"leaf_digest", path.leaf_digest.hex()},
                {"siblings", siblings},
                {"directions", directions},
                {"root", path.root.hex()}};
}

MerkleAuditPath audit_path_from_json(const json& j) {
    MerkleAuditPath path;
    path.leaf_digest = Digest256::from_hex(j.at("leaf_digest").get<std::string>());
    for (const json& s : j.at("siblings")) path.siblings.push_back(Digest256::from_hex(s.get<std::string>()));
    for (const json& d : j.at("directions")) path.directions.push_back(d.get<std::uint8_t>());
    path.root = Digest256::from_hex(j.at("root").get<std::string>());
    return path;
}

json proof_set_to_json(const CsmtProofSet& proof_set) {
    json hops = json::array();
    for (const ProofArtifact& hop : proof_set.mrp_hops) hops.push_back(artifact_to_json(hop));
    json path = json::array();
    for (std::uint8_t b : proof_set.path.bits) path.push_back(int(b));
    return json{{"ltr", artifact_to_json(proof_set.ltr)},
                {"mrp_hops", hops},
                {"path", path},
                {"root_digest", proof_set.root_digest.hex()}};
}

CsmtProofSet proof_set_from_json(const json& j) {
    CsmtProofSet out;
    out.ltr = artifact_from_json(j.at("ltr"));
    for (const json& h : j.at("mrp_hops")) out.mrp_hops.push_back(artifact_from_json(h));
    for (const json& b : j.at("path")) out.path.bits.push_back(b.get<std::uint8_t>());
    out.root_digest = Digest256::from_hex(j.at("root_digest").get<std::string>());
    return out;
}

json transform_spec_to_json(const TransformSpec& spec) {
    return json{{"id", spec.id},
                {"kind", transform_kind_name(spec.kind)},
                {"scale", spec.scale},
                {"input_dim", spec.input_dim},
                {"output_dim", spec.output_dim},
                {"params", payload_to_json(spec.params)}};
}

TransformSpec transform_spec_from_json(const json& j) {
    TransformSpec spec;
    spec.id = j.at("id").get<std::string>();
    auto kind = transform_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) raise(errc::bad_request, "unknown transform kind");
    spec.kind = *kind;
    spec.scale = j.at("scale").get<unsigned>();
    spec.input_dim = j.at("input_dim").get<unsigned>();
    spec.output_dim = j.at("output_dim").get<unsigned>();
    spec.params = payload_from_json(j.at("params"));
    return spec;
}

json tree_to_json(const Tree& tree) {
    const TreeConfig& config = tree.config();
    json leaves = json::array();
    for (const auto& [index, leaf] : tree.occupied()) {
        leaves.push_back(json{{"index", index}, {"leaf", leaf_to_json(leaf)}});
    }
    return json{{"format_version", kFileFormatVersion},
                {"config",
                 json{{"height", config.height},
                      {"transform_id", config.transform_id},
                      {"aggregator_id", config.aggregator_id},
                      {"scale", config.scale}}},
                {"root_digest", tree.root_digest().hex()},
                {"leaves", leaves}};
}

Tree tree_from_json(const Registry& registry, const json& j) {
    TreeConfig config;
    const json& c = j.at("config");
    config.height = c.at("height").get<unsigned>();
    config.transform_id = c.at("transform_id").get<std::string>();
    config.aggregator_id = c.at("aggregator_id").get<std::string>();
    config.scale = c.at("scale").get<unsigned>();

    std::vector<std::pair<std::uint64_t, LeafValue>> leaves;
    for (const json& e : j.at("leaves")) {
        leaves.emplace_back(e.at("index").get<std::uint64_t>(), leaf_from_json(e.at("leaf")));
    }
    Tree tree = Tree::build(registry, config, leaves);
    const Digest256 expected = Digest256::from_hex(j.at("root_digest").get<std::string>());
    if (tree.root_digest() != expected) {
        raise(errc::io_failure, "tree file root digest does not match rebuilt tree");
    }
    return tree;
}

void registry_load_config(Registry& registry, const json& config) {
    if (config.contains("aggregators")) {
        for (const json& a : config.at("aggregators")) {
            const std::string id = a.at("id").get<std::string>();
            if (registry.has_aggregator(id)) continue;
            AggregatorSpec spec;
            spec.id = id;
            registry.add_aggregator(spec);
        }
    }
    if (config.contains("transforms")) {
        for (const json& t : config.at("transforms")) {
            TransformSpec spec;
            spec.id = t.at("id").get<std::string>();
            auto kind = transform_kind_from_name(t.at("kind").get<std::string>());
            if (!kind) raise(errc::bad_request, "unknown transform kind in config");
            spec.kind = *kind;
            spec.scale = t.at("scale").get<unsigned>();
            spec.input_dim = t.value("input_dim", 1u);
            std::vector<double> params;
            if (t.contains("params")) params = t.at("params").get<std::vector<double>>();
            for (double p : params) spec.params.push_back(encode_fixed(p, spec.scale));
            switch (spec.kind) {
                case TransformKind::bincount:
                    spec.output_dim = unsigned(params.size()) - 1;
                    break;
                case TransformKind::identity:
                    spec.output_dim = spec.input_dim;
                    break;
                default:
                    spec.output_dim = 1;
                    break;
            }
            if (registry.has_transform(spec.id)) continue;
            registry.add_transform(std::move(spec));
        }
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out.good()) raise(errc::io_failure, "write to '" + path.string() + "' failed");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        raise(errc::io_failure, "invalid JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

void write_bytes_file(const std::filesystem::path& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(data.data()), long(data.size()));
    if (!out.good()) raise(errc::io_failure, "write to '" + path.string() + "' failed");
}

Bytes read_bytes_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "'");
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

} // namespace csmt::io
