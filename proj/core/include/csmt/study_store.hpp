#pragma once

#include "csmt/bulletin.hpp"
#include "csmt/json_io.hpp"
#include "csmt/stats.hpp"
#include "csmt/verifier.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace csmt {

/// Public artifacts of one tree of a study, as they appear in the
/// downloadable bundle.
struct BundleTree {
    std::string label;
    std::string transform_id;
    Digest256 root;
    Bytes eta; // session nonce the stored proof sets were drawn with
    std::vector<std::string> included_users;
    std::vector<DeliveryRecord> deliveries;            // every transformed user
    std::vector<Digest256> claimed_leaves;             // non-default leaves
    std::map<std::string, CsmtProofSet> proof_sets;    // user -> stored set
    std::map<std::string, MerkleAuditPath> phr_paths;  // included users
};

/// A study's complete downloadable bundle. Verification never needs more
/// than this (no hidden server state).
struct StudyBundle {
    BulletinRecord bulletin;
    io::json settings;
    std::map<std::string, VerificationKey> vks; // "ltr-<label>", "mrp", "post"
    std::optional<StatisticResult> result;
    std::vector<BundleTree> trees;

    const BundleTree& tree(const std::string& label) const;
    const VerificationKey& vk(const std::string& name) const;

    /// Registry rebuilt from the published transform specs.
    Registry build_registry() const;

    unsigned height() const;
    unsigned scale() const;

    /// Everything a verifier needs for one user against one tree.
    MembershipContext membership_context(const std::string& user_id,
                                         const std::string& tree_label) const;
};

io::json statistic_result_to_json(const StatisticResult& result);
StatisticResult statistic_result_from_json(const io::json& j);

/// Directory-backed write-once store of published study bundles.
class StudyStore {
public:
    explicit StudyStore(std::filesystem::path root);

    bool has_study(const std::string& study_id) const;
    std::filesystem::path study_dir(const std::string& study_id) const;
    std::vector<std::string> study_ids() const;

    void write_bundle(const StudyBundle& bundle) const;
    StudyBundle read_bundle(const std::string& study_id) const;

    /// Bundle as a flat relative-path -> JSON map (the download format).
    static std::map<std::string, io::json> bundle_files(const StudyBundle& bundle);
    static StudyBundle bundle_from_files(const std::map<std::string, io::json>& files);

    static StudyBundle read_bundle_dir(const std::filesystem::path& dir);
    static void write_bundle_dir(const std::filesystem::path& dir, const StudyBundle& bundle);

private:
    std::filesystem::path root_;
};

} // namespace csmt
