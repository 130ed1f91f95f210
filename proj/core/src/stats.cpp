#include "csmt/stats.hpp"

#include "csmt/errors.hpp"

#include <algorithm>
#include <set>

namespace csmt {

const char* stat_kind_name(StatKind kind) noexcept {
    switch (kind) {
        case StatKind::ks_max_gap: return "ks_max_gap";
        case StatKind::lrt: return "lrt";
        case StatKind::accuracy: return "accuracy";
    }
    return "unknown";
}

std::vector<double> default_hd_bins() {
    std::vector<double> edges;
    for (int i = 0; i <= 12; ++i) edges.push_back(11.0 * i);
    return edges;
}

const TransformSpec& ensure_transform(Registry& registry, const TransformSpec& spec) {
    if (registry.has_transform(spec.id)) {
        const TransformSpec& existing = registry.transform(spec.id);
        if (existing.kind != spec.kind || existing.params != spec.params ||
            existing.input_dim != spec.input_dim || existing.output_dim != spec.output_dim ||
            existing.scale != spec.scale) {
            raise(errc::duplicate_entry,
                  "transform id '" + spec.id + "' already registered with different parameters");
        }
        return existing;
    }
    registry.add_transform(spec);
    return registry.transform(spec.id);
}

namespace {

std::vector<std::string> merged_users(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
    std::vector<std::string> all = a;
    std::set<std::string> seen(a.begin(), a.end());
    for (const std::string& user : b) {
        if (seen.insert(user).second) all.push_back(user);
    }
    return all;
}

std::vector<FixedPoint> quantize_params(const std::vector<double>& params, unsigned scale) {
    std::vector<FixedPoint> out;
    out.reserve(params.size());
    for (double p : params) out.push_back(encode_fixed(p, scale));
    return out;
}

ProofArtifact prove_post(TranscriptBackend& backend, const KeyPair& keys, PostKind kind,
                         const std::vector<FixedPoint>& input_a,
                         const std::vector<FixedPoint>& input_b, const FixedPoint& zeta) {
    const FixedPoint out[1] = {zeta};
    const std::vector<PublicField> publics{
        {fields::kInputA, payload_digest(input_a)},
        {fields::kInputB, payload_digest(input_b)},
        {fields::kOutput, payload_digest(out)},
    };
    return backend.prove(keys.pk, PostWitness{kind, input_a, input_b}, publics);
}

} // namespace

StudyArtifacts run_ks_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                               const KsPipelineConfig& config) {
    if (config.group_a.empty() || config.group_b.empty()) {
        raise(errc::bad_request, "both cohorts must be nonempty");
    }
    TransformSpec spec;
    spec.id = config.study_id + "/bincount";
    spec.kind = TransformKind::bincount;
    spec.params = quantize_params(config.bins.empty() ? default_hd_bins() : config.bins, config.scale);
    spec.input_dim = 1;
    spec.output_dim = unsigned(spec.params.size()) - 1;
    spec.scale = config.scale;
    ensure_transform(registry, spec);

    StudyArtifacts study;
    study.study_id = config.study_id;
    study.height = config.height;
    study.scale = config.scale;

    const KeyPair ltr_keys = backend.setup(backend.ltr_circuit(spec.id), config.lambda);
    study.mrp_keys = backend.setup(backend.mrp_circuit(kSumAggregatorId, config.scale), config.lambda);
    study.post_keys =
        backend.setup(TranscriptBackend::post_circuit(PostKind::max_abs_gap, config.scale),
                      config.lambda);
    prover.register_keys(ltr_keys);
    prover.register_keys(study.mrp_keys);

    const std::vector<std::string> all_users = merged_users(config.group_a, config.group_b);
    const TreeConfig tree_config{config.height, spec.id, kSumAggregatorId, config.scale};

    for (const auto& [label, group] : std::initializer_list<
             std::pair<const char*, const std::vector<std::string>*>>{
             {"group-a", &config.group_a}, {"group-b", &config.group_b}}) {
        TreeSide side;
        side.label = label;
        side.transform_id = spec.id;
        side.ltr_keys = ltr_keys;
        side.cohort = CohortSpec{all_users, *group};
        side.build = prover.build_study(config.study_id, label, side.cohort, tree_config,
                                        ltr_keys.vk, study.mrp_keys.vk);
        side.root_value = side.build.root;
        side.root = side.build.root_digest;
        study.trees.push_back(std::move(side));
    }

    const std::vector<FixedPoint>& psi_a = study.trees[0].root_value.payload;
    const std::vector<FixedPoint>& psi_b = study.trees[1].root_value.payload;
    const FixedPoint zeta = max_absolute_gap(psi_a, psi_b);

    study.result.kind = StatKind::ks_max_gap;
    study.result.zeta = zeta;
    study.result.decoded = decode_fixed(zeta);
    study.result.scale = config.scale;
    study.result.root_digests = {study.trees[0].root, study.trees[1].root};
    study.result.post_proof =
        prove_post(backend, study.post_keys, PostKind::max_abs_gap, psi_a, psi_b, zeta);
    return study;
}

StudyArtifacts run_lrt_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                                const LrtPipelineConfig& config) {
    if (config.cohort.empty()) raise(errc::bad_request, "cohort must be nonempty");
    if (config.beta_full.size() != config.beta_reduced.size()) {
        raise(errc::shape_mismatch,
              "full and reduced coefficient vectors must have equal length (pad dropped terms with zero)");
    }

    StudyArtifacts study;
    study.study_id = config.study_id;
    study.height = config.height;
    study.scale = config.scale;

    study.mrp_keys = backend.setup(backend.mrp_circuit(kSumAggregatorId, config.scale), config.lambda);
    study.post_keys = backend.setup(
        TranscriptBackend::post_circuit(PostKind::lrt_stat, config.scale), config.lambda);
    prover.register_keys(study.mrp_keys);

    const TreeConfig base_config{config.height, "", kSumAggregatorId, config.scale};
    for (const auto& [label, beta] :
         std::initializer_list<std::pair<const char*, const std::vector<double>*>>{
             {"full", &config.beta_full}, {"reduced", &config.beta_reduced}}) {
        TransformSpec spec;
        spec.id = config.study_id + "/loglik-" + label;
        spec.kind = TransformKind::loglik;
        spec.params = quantize_params(*beta, config.scale);
        spec.input_dim = unsigned(beta->size()); // features + label
        spec.output_dim = 1;
        spec.scale = config.scale;
        ensure_transform(registry, spec);

        TreeSide side;
        side.label = label;
        side.transform_id = spec.id;
        side.ltr_keys = backend.setup(backend.ltr_circuit(spec.id), config.lambda);
        prover.register_keys(side.ltr_keys);
        side.cohort = CohortSpec{config.cohort, config.cohort};
        TreeConfig tree_config = base_config;
        tree_config.transform_id = spec.id;
        side.build = prover.build_study(config.study_id, label, side.cohort, tree_config,
                                        side.ltr_keys.vk, study.mrp_keys.vk);
        side.root_value = side.build.root;
        side.root = side.build.root_digest;
        study.trees.push_back(std::move(side));
    }

    const std::vector<FixedPoint>& psi_full = study.trees[0].root_value.payload;
    const std::vector<FixedPoint>& psi_reduced = study.trees[1].root_value.payload;
    const FixedPoint zeta = lrt_statistic(psi_full[0], psi_reduced[0]);

    study.result.kind = StatKind::lrt;
    study.result.zeta = zeta;
    study.result.decoded = decode_fixed(zeta);
    study.result.scale = config.scale;
    study.result.root_digests = {study.trees[0].root, study.trees[1].root};
    study.result.post_proof =
        prove_post(backend, study.post_keys, PostKind::lrt_stat, psi_full, psi_reduced, zeta);
    return study;
}

StudyArtifacts run_acc_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                                const AccPipelineConfig& config) {
    if (config.cohort.empty()) raise(errc::bad_request, "test cohort must be nonempty");
    if (config.beta.empty()) raise(errc::bad_request, "coefficient vector must be nonempty");

    StudyArtifacts study;
    study.study_id = config.study_id;
    study.height = config.height;
    study.scale = config.scale;

    study.mrp_keys = backend.setup(backend.mrp_circuit(kSumAggregatorId, config.scale), config.lambda);
    study.post_keys = backend.setup(
        TranscriptBackend::post_circuit(PostKind::acc_ratio, config.scale), config.lambda);
    prover.register_keys(study.mrp_keys);

    TransformSpec count_spec;
    count_spec.id = config.study_id + "/count";
    count_spec.kind = TransformKind::count_one;
    count_spec.input_dim = unsigned(config.beta.size()); // same record shape as the assess tree
    count_spec.output_dim = 1;
    count_spec.scale = config.scale;
    ensure_transform(registry, count_spec);

    TransformSpec assess_spec;
    assess_spec.id = config.study_id + "/assess";
    assess_spec.kind = TransformKind::classassess;
    assess_spec.params = quantize_params(config.beta, config.scale);
    assess_spec.input_dim = unsigned(config.beta.size());
    assess_spec.output_dim = 1;
    assess_spec.scale = config.scale;
    ensure_transform(registry, assess_spec);

    for (const TransformSpec* spec : {&count_spec, &assess_spec}) {
        TreeSide side;
        side.label = spec == &count_spec ? "count" : "correct";
        side.transform_id = spec->id;
        side.ltr_keys = backend.setup(backend.ltr_circuit(spec->id), config.lambda);
        prover.register_keys(side.ltr_keys);
        side.cohort = CohortSpec{config.cohort, config.cohort};
        const TreeConfig tree_config{config.height, spec->id, kSumAggregatorId, config.scale};
        side.build = prover.build_study(config.study_id, side.label, side.cohort, tree_config,
                                        side.ltr_keys.vk, study.mrp_keys.vk);
        side.root_value = side.build.root;
        side.root = side.build.root_digest;
        study.trees.push_back(std::move(side));
    }

    const std::vector<FixedPoint>& count_payload = study.trees[0].root_value.payload;
    const std::vector<FixedPoint>& correct_payload = study.trees[1].root_value.payload;
    const FixedPoint zeta = accuracy_ratio(count_payload[0], correct_payload[0]);

    study.result.kind = StatKind::accuracy;
    study.result.zeta = zeta;
    study.result.decoded = decode_fixed(zeta);
    study.result.scale = config.scale;
    study.result.root_digests = {study.trees[0].root, study.trees[1].root};
    study.result.post_proof =
        prove_post(backend, study.post_keys, PostKind::acc_ratio, count_payload, correct_payload, zeta);
    return study;
}

StatVerifyReport stat_verify(const StatisticResult& result, const BulletinRecord& published,
                             const VerificationKey& vk_post, const MembershipReport& sampled_user) {
    StatVerifyReport report;
    report.ok = true;
    auto flag = [&report](const char* stage, bool ok, const std::string& detail) {
        report.stages.push_back({stage, ok});
        if (!ok) {
            report.ok = false;
            if (report.detail.empty()) report.detail = detail;
        }
    };

    flag("sampled-user", sampled_user.verdict == MembershipVerdict::included,
         "sampled user's inclusion proof failed: " + sampled_user.detail);

    // the record pins the post-circuit key the statistic must verify under
    const Digest256* pinned_post = nullptr;
    for (const auto& [name, fingerprint] : published.vk_fingerprints) {
        if (name == "post") pinned_post = &fingerprint;
    }
    const VerificationOutcome zk = TranscriptBackend::verify(vk_post, result.post_proof);
    flag("post-proof",
         zk.ok && pinned_post && *pinned_post == vk_post.fingerprint(),
         zk.ok ? "post-circuit key is not the published one"
               : std::string("post proof: ") + verify_failure_name(zk.reason));

    // the claimed statistic and roots must be the artifact's own bindings
    const FixedPoint out[1] = {result.zeta};
    const Digest256* input_a = result.post_proof.find(fields::kInputA);
    const Digest256* input_b = result.post_proof.find(fields::kInputB);
    const Digest256* output = result.post_proof.find(fields::kOutput);
    flag("zeta-binding",
         input_a && input_b && output && result.root_digests.size() == 2 &&
             *input_a == result.root_digests[0] && *input_b == result.root_digests[1] &&
             *output == payload_digest(out),
         "statistic does not match the post-proof bindings");

    flag("bulletin-record", verify_bulletin_record(published),
         "bulletin record signature does not verify");

    std::vector<Digest256> published_roots;
    for (const auto& [label, digest] : published.roots) published_roots.push_back(digest);
    flag("root-digests", result.root_digests == published_roots,
         "root digests differ from the published roots");
    return report;
}

} // namespace csmt
