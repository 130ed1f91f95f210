#pragma once

#include "csmt/bulletin.hpp"
#include "csmt/exclusivity.hpp"
#include "csmt/jobs.hpp"
#include "csmt/phr.hpp"
#include "csmt/prover.hpp"
#include "csmt/stats.hpp"
#include "csmt/study_store.hpp"

#include <filesystem>
#include <shared_mutex>

namespace csmt {

struct WorkspaceConfig {
    std::filesystem::path home;
    unsigned tree_height = 16; // TREE_HEIGHT
    unsigned scale = 8;        // ZKP_SCALER
    Bytes witness_key;         // 32 bytes; generated into the home on first use when empty
    Bytes deployment_seed;     // backend setup seed; generated likewise
    std::filesystem::path transforms_config; // optional declarative spec file
};

/// Home-directory application state shared by the CLI and the service:
/// registry, PHR store, prover (keys + witness store), bulletin, and the
/// published study bundles.
class Workspace {
public:
    explicit Workspace(WorkspaceConfig config);

    Registry& registry() { return registry_; }
    TranscriptBackend& backend() { return *backend_; }
    PhrStore& phr() { return phr_; }
    StudyProver& prover() { return *prover_; }
    BulletinLog& bulletin() { return bulletin_; }
    StudyStore& studies() { return studies_; }
    const WorkspaceConfig& config() const { return config_; }

    /// Persist registry, PHR, bulletin, keys and the encrypted witness store.
    void save();

    /// Job execution surface; also called directly by the CLI in local mode.
    io::json execute(JobKind kind, const io::json& request);

    /// Single-tree study build (the `study build` CLI operation).
    io::json build_generic_study(const io::json& request);

    /// Locking used by the service: pipelines and builds take the exclusive
    /// lock, proof generation takes the shared lock.
    std::shared_mutex& state_mutex() { return state_mutex_; }

private:
    io::json run_pipeline(JobKind kind, const io::json& request);
    io::json prove_ltr_job(const io::json& request);
    io::json prove_mrp_job(const io::json& request);
    io::json audit_job(const io::json& request);

    StudyBundle assemble_bundle(const StudyArtifacts& study);
    void publish_study(const StudyArtifacts& study, StudyBundle bundle);
    void load_state();

    WorkspaceConfig config_;
    Registry registry_;
    std::unique_ptr<TranscriptBackend> backend_;
    PhrStore phr_;
    std::unique_ptr<StudyProver> prover_;
    BulletinLog bulletin_;
    StudyStore studies_;
    std::vector<KeyPair> keys_; // persisted so proofs work across invocations
    std::shared_mutex state_mutex_;
};

/// Assemble the public audit bundle for one tree of a stored study.
AuditBundle audit_bundle_from_study(const StudyBundle& bundle, const std::string& tree_label);

/// Default level digests (level 0..K) for a tree's transform, computable
/// by any verifier from the published settings.
std::vector<Digest256> default_level_digests(const Registry& registry, const TreeConfig& config);

} // namespace csmt
