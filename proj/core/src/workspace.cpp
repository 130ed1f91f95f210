#include "csmt/workspace.hpp"

#include "csmt/errors.hpp"
#include "csmt/exclusivity.hpp"
#include "csmt/tree.hpp"

#include <chrono>
#include <ctime>

namespace csmt {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Bytes load_or_create_secret(const fs::path& path, std::size_t len) {
    if (fs::exists(path)) {
        const Bytes text = io::read_bytes_file(path);
        std::string hex(text.begin(), text.end());
        while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r')) hex.pop_back();
        Bytes out = from_hex(hex);
        if (out.size() != len) raise(errc::io_failure, "unexpected secret length in " + path.string());
        return out;
    }
    Bytes secret = random_bytes(len);
    const std::string hex = to_hex(secret) + "\n";
    io::write_bytes_file(path, Bytes(hex.begin(), hex.end()));
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write);
    return secret;
}

SaltBytes salt_from_hex_str(const std::string& hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != kSaltLen) raise(errc::io_failure, "corrupt salt");
    SaltBytes out;
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

} // namespace

std::vector<Digest256> default_level_digests(const Registry& registry, const TreeConfig& config) {
    std::vector<Digest256> out;
    for (const NodeValue& node : Tree::compute_default_chain(registry, config)) {
        out.push_back(node.digest);
    }
    return out;
}

AuditBundle audit_bundle_from_study(const StudyBundle& bundle, const std::string& tree_label) {
    const BundleTree& tree = bundle.tree(tree_label);
    AuditBundle audit;
    audit.phr_root = bundle.bulletin.phr_root;
    audit.root_digest = tree.root;
    audit.eta = tree.eta;
    audit.claimed_leaves = tree.claimed_leaves;
    for (const std::string& user : tree.included_users) {
        const DeliveryRecord* delivery = nullptr;
        for (const DeliveryRecord& d : tree.deliveries) {
            if (d.user_id == user) {
                delivery = &d;
                break;
            }
        }
        if (!delivery) raise(errc::incomplete_bundle, "missing delivery record for '" + user + "'");
        auto path = tree.phr_paths.find(user);
        if (path == tree.phr_paths.end()) {
            raise(errc::incomplete_bundle, "missing PHR path for '" + user + "'");
        }
        audit.included.push_back(AuditMember{user, delivery->h_raw, delivery->h_tau, path->second});
        auto set = tree.proof_sets.find(user);
        if (set == tree.proof_sets.end()) {
            raise(errc::incomplete_bundle, "missing proof set for '" + user + "'");
        }
        audit.proof_sets.emplace_back(user, set->second);
    }
    return audit;
}

Workspace::Workspace(WorkspaceConfig config)
    : config_(std::move(config)), studies_(config_.home / "studies") {
    fs::create_directories(config_.home);
    if (config_.witness_key.empty()) {
        config_.witness_key = load_or_create_secret(config_.home / "witness.key", 32);
    }
    if (config_.deployment_seed.empty()) {
        config_.deployment_seed = load_or_create_secret(config_.home / "backend.seed", 32);
    }
    backend_ = std::make_unique<TranscriptBackend>(registry_, config_.deployment_seed);
    prover_ = std::make_unique<StudyProver>(registry_, *backend_, phr_);
    load_state();
}

void Workspace::load_state() {
    const fs::path registry_file = config_.home / "registry.json";
    if (fs::exists(registry_file)) {
        const json doc = io::read_json_file(registry_file);
        for (const json& a : doc.at("aggregators")) {
            const std::string id = a.at("id").get<std::string>();
            if (!registry_.has_aggregator(id)) registry_.add_aggregator(AggregatorSpec{id});
        }
        for (const json& t : doc.at("transforms")) {
            TransformSpec spec = io::transform_spec_from_json(t);
            if (!registry_.has_transform(spec.id)) registry_.add_transform(std::move(spec));
        }
    }
    const fs::path phr_file = config_.home / "phr.json";
    if (fs::exists(phr_file)) {
        const json doc = io::read_json_file(phr_file);
        for (const json& r : doc.at("records")) {
            phr_.register_record(r.at("user_id").get<std::string>(),
                                 r.at("datum").get<std::vector<double>>(),
                                 UserSalt{salt_from_hex_str(r.at("mu").get<std::string>())},
                                 TransformSalt{salt_from_hex_str(r.at("tau").get<std::string>())});
        }
    }
    const fs::path keys_file = config_.home / "keys.json";
    if (fs::exists(keys_file)) {
        const json doc = io::read_json_file(keys_file);
        for (const json& k : doc.at("keys")) {
            KeyPair keys = io::keypair_from_json(k);
            prover_->register_keys(keys);
            keys_.push_back(std::move(keys));
        }
    }
    const fs::path store_file = config_.home / "witness.store";
    if (fs::exists(store_file)) {
        prover_->store() = WitnessStore::load(store_file, config_.witness_key, registry_);
    }
    const fs::path bulletin_file = config_.home / "bulletin.jsonl";
    if (fs::exists(bulletin_file)) bulletin_ = BulletinLog::load(bulletin_file);

    if (!config_.transforms_config.empty()) {
        io::registry_load_config(registry_, io::read_json_file(config_.transforms_config));
    }
}

void Workspace::save() {
    json transforms = json::array();
    for (const std::string& id : registry_.transform_ids()) {
        transforms.push_back(io::transform_spec_to_json(registry_.transform(id)));
    }
    json aggregators = json::array();
    aggregators.push_back(json{{"id", kSumAggregatorId}});
    io::write_json_file(config_.home / "registry.json",
                        json{{"transforms", transforms}, {"aggregators", aggregators}});

    json records = json::array();
    for (const std::string& user : phr_.user_ids()) {
        const PhrRecord& r = phr_.record(user);
        records.push_back(json{
            {"user_id", r.user_id},
            {"datum", r.datum},
            {"mu", to_hex(std::span<const std::uint8_t>(r.mu.bytes.data(), kSaltLen))},
            {"tau", to_hex(std::span<const std::uint8_t>(r.tau.bytes.data(), kSaltLen))}});
    }
    io::write_json_file(config_.home / "phr.json", json{{"records", records}});

    json keys = json::array();
    for (const KeyPair& k : keys_) keys.push_back(io::keypair_to_json(k));
    io::write_json_file(config_.home / "keys.json", json{{"keys", keys}});

    prover_->store().save(config_.home / "witness.store", config_.witness_key);
    bulletin_.save(config_.home / "bulletin.jsonl");
}

io::json Workspace::execute(JobKind kind, const io::json& request) {
    switch (kind) {
        case JobKind::ltr: return prove_ltr_job(request);
        case JobKind::mrp: return prove_mrp_job(request);
        case JobKind::pipeline_ks:
        case JobKind::pipeline_lrt:
        case JobKind::pipeline_acc: return run_pipeline(kind, request);
        case JobKind::audit: return audit_job(request);
    }
    raise(errc::bad_request, "unhandled job kind");
}

StudyBundle Workspace::assemble_bundle(const StudyArtifacts& study) {
    StudyBundle bundle;

    json transforms = json::array();
    json tree_meta = json::array();
    for (const TreeSide& side : study.trees) {
        transforms.push_back(io::transform_spec_to_json(registry_.transform(side.transform_id)));
        tree_meta.push_back(json{{"label", side.label}, {"transform_id", side.transform_id}});
    }
    const bool has_result = !study.result.root_digests.empty();
    bundle.settings = json{{"format_version", io::kFileFormatVersion},
                           {"study_id", study.study_id},
                           {"kind", has_result ? stat_kind_name(study.result.kind) : "study"},
                           {"scale", study.scale},
                           {"height", study.height},
                           {"aggregator_id", kSumAggregatorId},
                           {"hash", "SHA-256"},
                           {"salt_len", kSaltLen},
                           {"transforms", transforms},
                           {"trees", tree_meta}};

    BulletinRecord record;
    record.study_id = study.study_id;
    record.phr_root = phr_.root();
    record.timestamp = now_iso8601();
    const BulletinSigner signer =
        BulletinSigner::from_private_key(load_or_create_secret(config_.home / "bulletin.key", 32));
    for (const TreeSide& side : study.trees) {
        bundle.vks["ltr-" + side.label] = side.ltr_keys.vk;
        record.roots.emplace_back(side.label, side.root);
        record.vk_fingerprints.emplace_back("ltr-" + side.label, side.ltr_keys.vk.fingerprint());
    }
    bundle.vks["mrp"] = study.mrp_keys.vk;
    record.vk_fingerprints.emplace_back("mrp", study.mrp_keys.vk.fingerprint());
    if (has_result) {
        bundle.vks["post"] = study.post_keys.vk;
        record.vk_fingerprints.emplace_back("post", study.post_keys.vk.fingerprint());
        bundle.result = study.result;
    }
    sign_bulletin_record(record, signer);
    bundle.bulletin = std::move(record);

    for (const TreeSide& side : study.trees) {
        BundleTree tree;
        tree.label = side.label;
        tree.transform_id = side.transform_id;
        tree.root = side.root;
        tree.eta = random_bytes(kSaltLen);
        tree.included_users = side.cohort.included;
        tree.deliveries = side.build.deliveries;

        const StoredTree* stored = prover_->store().find_tree(side.root);
        if (!stored) raise(errc::not_built, "built tree vanished from the witness store");
        for (const auto& [index, leaf] : stored->tree->occupied()) {
            tree.claimed_leaves.push_back(leaf_digest(leaf));
        }
        for (const DeliveryRecord& delivery : tree.deliveries) {
            tree.proof_sets[delivery.user_id] = prover_->prove_set(
                delivery.h_raw, delivery.h_tau, tree.eta, side.ltr_keys.vk, study.mrp_keys.vk,
                side.root);
        }
        for (const std::string& user : tree.included_users) {
            const PhrEntry& entry = phr_.entry(user);
            tree.phr_paths[user] = phr_.prove_membership(entry.h_raw, entry.h_tau);
        }
        bundle.trees.push_back(std::move(tree));
    }
    return bundle;
}

void Workspace::publish_study(const StudyArtifacts& study, StudyBundle bundle) {
    bulletin_.publish(bundle.bulletin);
    studies_.write_bundle(bundle);
    for (const TreeSide& side : study.trees) keys_.push_back(side.ltr_keys);
    keys_.push_back(study.mrp_keys);
    if (!study.result.root_digests.empty()) keys_.push_back(study.post_keys);
    save();
}

io::json Workspace::run_pipeline(JobKind kind, const io::json& request) {
    const std::string study_id = request.at("study_id").get<std::string>();
    if (studies_.has_study(study_id)) {
        raise(errc::duplicate_entry, "study '" + study_id + "' already published");
    }
    const unsigned scale = request.value("scale", config_.scale);
    const unsigned height = request.value("height", config_.tree_height);
    const unsigned lambda = request.value("lambda", 128u);

    StudyArtifacts study;
    if (kind == JobKind::pipeline_ks) {
        KsPipelineConfig config;
        config.study_id = study_id;
        config.scale = scale;
        config.height = height;
        config.lambda = lambda;
        if (request.contains("bins")) config.bins = request.at("bins").get<std::vector<double>>();
        config.group_a = request.at("group_a").get<std::vector<std::string>>();
        config.group_b = request.at("group_b").get<std::vector<std::string>>();
        study = run_ks_pipeline(registry_, *backend_, *prover_, config);
    } else if (kind == JobKind::pipeline_lrt) {
        LrtPipelineConfig config;
        config.study_id = study_id;
        config.scale = scale;
        config.height = height;
        config.lambda = lambda;
        config.beta_full = request.at("beta_full").get<std::vector<double>>();
        config.beta_reduced = request.at("beta_reduced").get<std::vector<double>>();
        config.cohort = request.at("cohort").get<std::vector<std::string>>();
        study = run_lrt_pipeline(registry_, *backend_, *prover_, config);
    } else {
        AccPipelineConfig config;
        config.study_id = study_id;
        config.scale = scale;
        config.height = height;
        config.lambda = lambda;
        config.beta = request.at("beta").get<std::vector<double>>();
        config.cohort = request.at("cohort").get<std::vector<std::string>>();
        study = run_acc_pipeline(registry_, *backend_, *prover_, config);
    }

    StudyBundle bundle = assemble_bundle(study);
    const json bulletin_json = io::bulletin_record_to_json(bundle.bulletin);
    publish_study(study, std::move(bundle));

    json roots = json::object();
    for (const TreeSide& side : study.trees) roots[side.label] = side.root.hex();
    return json{{"study_id", study_id},
                {"kind", stat_kind_name(study.result.kind)},
                {"zeta", io::fixed_to_json(study.result.zeta)},
                {"decoded", study.result.decoded},
                {"scale", study.scale},
                {"roots", roots},
                {"bulletin", bulletin_json}};
}

io::json Workspace::build_generic_study(const io::json& request) {
    const std::string study_id = request.at("study_id").get<std::string>();
    if (studies_.has_study(study_id)) {
        raise(errc::duplicate_entry, "study '" + study_id + "' already published");
    }
    const std::string label = request.value("tree", "main");
    const unsigned scale = request.value("scale", config_.scale);
    const unsigned height = request.value("height", config_.tree_height);
    const unsigned lambda = request.value("lambda", 128u);

    const json& tdef = request.at("transform");
    TransformSpec spec;
    spec.id = tdef.value("id", study_id + "/" + tdef.at("kind").get<std::string>());
    auto kind = transform_kind_from_name(tdef.at("kind").get<std::string>());
    if (!kind) raise(errc::bad_request, "unknown transform kind");
    spec.kind = *kind;
    spec.scale = scale;
    spec.input_dim = tdef.value("input_dim", 1u);
    std::vector<double> params;
    if (tdef.contains("params")) params = tdef.at("params").get<std::vector<double>>();
    for (double p : params) spec.params.push_back(encode_fixed(p, scale));
    switch (spec.kind) {
        case TransformKind::bincount: spec.output_dim = unsigned(params.size()) - 1; break;
        case TransformKind::identity: spec.output_dim = spec.input_dim; break;
        default: spec.output_dim = 1; break;
    }
    ensure_transform(registry_, spec);

    StudyArtifacts study;
    study.study_id = study_id;
    study.height = height;
    study.scale = scale;
    study.mrp_keys = backend_->setup(backend_->mrp_circuit(kSumAggregatorId, scale), lambda);
    prover_->register_keys(study.mrp_keys);

    TreeSide side;
    side.label = label;
    side.transform_id = spec.id;
    side.ltr_keys = backend_->setup(backend_->ltr_circuit(spec.id), lambda);
    prover_->register_keys(side.ltr_keys);
    side.cohort.all_users =
        request.contains("users") ? request.at("users").get<std::vector<std::string>>() : phr_.user_ids();
    side.cohort.included = request.at("include").get<std::vector<std::string>>();
    const TreeConfig tree_config{height, spec.id, kSumAggregatorId, scale};
    side.build = prover_->build_study(study_id, label, side.cohort, tree_config, side.ltr_keys.vk,
                                      study.mrp_keys.vk);
    side.root_value = side.build.root;
    side.root = side.build.root_digest;
    study.trees.push_back(std::move(side));

    StudyBundle bundle = assemble_bundle(study);
    const json bulletin_json = io::bulletin_record_to_json(bundle.bulletin);
    publish_study(study, std::move(bundle));
    return json{{"study_id", study_id},
                {"tree", label},
                {"root", study.trees[0].root.hex()},
                {"collision_redraws", study.trees[0].build.collision_redraws},
                {"bulletin", bulletin_json}};
}

io::json Workspace::prove_ltr_job(const io::json& request) {
    const std::string study_id = request.at("study_id").get<std::string>();
    const std::string label = request.at("tree").get<std::string>();
    const StudyBundle bundle = studies_.read_bundle(study_id);
    const VerificationKey& vk = bundle.vk("ltr-" + label);

    const Digest256 h_raw = Digest256::from_hex(request.at("h_raw").get<std::string>());
    const Digest256 h_tau = Digest256::from_hex(request.at("h_tau").get<std::string>());
    const LtrProveOutcome out = prover_->ltr_prove(h_raw, h_tau, vk, bundle.height());
    return json{{"h_leaf", out.leaf_digest.hex()},
                {"index", out.index.value()},
                {"artifact", io::artifact_to_json(out.artifact)}};
}

io::json Workspace::prove_mrp_job(const io::json& request) {
    const std::string study_id = request.at("study_id").get<std::string>();
    const std::string label = request.at("tree").get<std::string>();
    const StudyBundle bundle = studies_.read_bundle(study_id);
    const BundleTree& tree = bundle.tree(label);

    const Digest256 h_leaf = Digest256::from_hex(request.at("h_leaf").get<std::string>());
    const std::uint64_t index = request.at("index").get<std::uint64_t>();
    const Bytes eta = from_hex(request.at("eta").get<std::string>());
    const MrpProveOutcome out =
        prover_->mrp_prove(h_leaf, LeafIndex::from_value(index, bundle.height()), eta,
                           bundle.vk("mrp"), tree.root);
    json hops = json::array();
    for (const ProofArtifact& hop : out.hops) hops.push_back(io::artifact_to_json(hop));
    json path = json::array();
    for (std::uint8_t b : out.path.bits) path.push_back(int(b));
    return json{{"root", out.root_digest.hex()}, {"path", path}, {"hops", hops}};
}

io::json Workspace::audit_job(const io::json& request) {
    const std::string study_id = request.at("study_id").get<std::string>();
    const std::string label = request.at("tree").get<std::string>();
    const StudyBundle bundle = studies_.read_bundle(study_id);
    const BundleTree& tree = bundle.tree(label);

    const AuditBundle audit = audit_bundle_from_study(bundle, label);
    const Registry registry = bundle.build_registry();
    const TreeConfig config{bundle.height(), tree.transform_id, kSumAggregatorId, bundle.scale()};
    const AuditOutcome outcome =
        verify_data_exclusivity(audit, bundle.vk("ltr-" + label), bundle.vk("mrp"),
                                default_level_digests(registry, config));
    return json{{"study_id", study_id},
                {"tree", label},
                {"status", audit_status_name(outcome.status)},
                {"ok", outcome.ok()},
                {"detail", outcome.detail}};
}

} // namespace csmt
