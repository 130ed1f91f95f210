#pragma once

#include "csmt/bulletin.hpp"
#include "csmt/prover.hpp"
#include "csmt/statistic_kernels.hpp"
#include "csmt/verifier.hpp"

#include <string>
#include <vector>

namespace csmt {

enum class StatKind { ks_max_gap, lrt, accuracy };

const char* stat_kind_name(StatKind kind) noexcept;

/// Decoded test statistic together with the scale it was computed at, the
/// roots it commits to, and the post-aggregation proof binding them.
struct StatisticResult {
    StatKind kind = StatKind::ks_max_gap;
    FixedPoint zeta;
    double decoded = 0.0;
    unsigned scale = 8;
    std::vector<Digest256> root_digests;
    ProofArtifact post_proof;
};

/// One tree of a pipeline run: its transform circuit keys, cohort, and
/// build outputs.
struct TreeSide {
    std::string label;
    std::string transform_id;
    KeyPair ltr_keys;
    NodeValue root_value;
    Digest256 root;
    CohortSpec cohort;
    BuildOutcome build;
};

struct StudyArtifacts {
    std::string study_id;
    unsigned height = 16;
    unsigned scale = 8;
    std::vector<TreeSide> trees;
    KeyPair mrp_keys;
    KeyPair post_keys;
    StatisticResult result;
};

struct KsPipelineConfig {
    std::string study_id;
    std::vector<double> bins; // strictly ascending edges
    unsigned scale = 8;
    unsigned height = 16;
    unsigned lambda = 128;
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;
};

struct LrtPipelineConfig {
    std::string study_id;
    std::vector<double> beta_full;
    std::vector<double> beta_reduced; // nested model: dropped coefficients are zero
    unsigned scale = 8;
    unsigned height = 16;
    unsigned lambda = 128;
    std::vector<std::string> cohort;
};

struct AccPipelineConfig {
    std::string study_id;
    std::vector<double> beta;
    unsigned scale = 8;
    unsigned height = 16;
    unsigned lambda = 128;
    std::vector<std::string> cohort;
};

/// Two bincount trees over the same user set, one per group, plus the
/// max-absolute-gap post circuit binding (Psi_A, Psi_B, zeta).
StudyArtifacts run_ks_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                               const KsPipelineConfig& config);

/// Full and reduced log-likelihood trees over the same cohort;
/// zeta = -2 (Psi_r - Psi_f).
StudyArtifacts run_lrt_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                                const LrtPipelineConfig& config);

/// Count tree (constant-one leaves) and correctness tree (classification
/// assessment leaves); accuracy = correct * 2^s / N with floor division.
StudyArtifacts run_acc_pipeline(Registry& registry, TranscriptBackend& backend, StudyProver& prover,
                                const AccPipelineConfig& config);

/// Bin edges used for the CAG-repeat case study: 12 equal-width bins
/// covering [0, 132].
std::vector<double> default_hd_bins();

struct StatVerifyReport {
    bool ok = false;
    std::vector<StageOutcome> stages;
    std::string detail;
};

/// Statistic verification: the sampled user's membership check, the post
/// proof (key fingerprint pinned by the record), the zeta binding, the
/// record signature, and the root digests against the published record.
StatVerifyReport stat_verify(const StatisticResult& result, const BulletinRecord& published,
                             const VerificationKey& vk_post, const MembershipReport& sampled_user);

/// Register the spec if new; verify that an existing registration carries
/// identical parameters.
const TransformSpec& ensure_transform(Registry& registry, const TransformSpec& spec);

} // namespace csmt
