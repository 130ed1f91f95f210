#pragma once

#include "csmt/digest.hpp"
#include "csmt/salt.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace csmt {

/// Public commitment of one registered record: (hash(delta, mu), hash(tau)).
struct PhrEntry {
    Digest256 h_raw;
    Digest256 h_tau;
    std::string user_id;

    bool operator==(const PhrEntry&) const = default;
};

/// Audit path in the PHR's plain Merkle tree. Directions are leaf side
/// first; bit 1 means the current node is the right child (sibling left).
struct MerkleAuditPath {
    Digest256 leaf_digest;
    std::vector<Digest256> siblings;
    std::vector<std::uint8_t> directions;
    Digest256 root;

    bool operator==(const MerkleAuditPath&) const = default;
};

Digest256 phr_leaf_digest(const Digest256& h_raw, const Digest256& h_tau);
bool phr_verify_membership(const Digest256& root, const MerkleAuditPath& path);

/// A participant's full record as held by the PHR database. The raw datum
/// and salts never leave the store except toward the study prover.
struct PhrRecord {
    std::string user_id;
    std::vector<double> datum;
    UserSalt mu;
    TransformSalt tau;
};

/// Record store committing to (hash(delta,mu), hash(tau)) tuples in a plain
/// Merkle tree with sorted leaves and duplicate-last padding to the next
/// power of two. Single-writer registration, snapshot reads.
class PhrStore {
public:
    PhrEntry register_record(const std::string& user_id, std::vector<double> datum,
                             const UserSalt& mu, const TransformSalt& tau);

    /// Registration with fresh random salts.
    PhrEntry register_record(const std::string& user_id, std::vector<double> datum);

    bool has_user(const std::string& user_id) const { return records_.count(user_id) != 0; }
    const PhrRecord& record(const std::string& user_id) const;
    const PhrEntry& entry(const std::string& user_id) const;
    std::optional<PhrEntry> find_entry(const Digest256& h_raw, const Digest256& h_tau) const;

    MerkleAuditPath prove_membership(const Digest256& h_raw, const Digest256& h_tau) const;

    const Digest256& root() const;
    std::size_t size() const { return records_.size(); }
    std::vector<std::string> user_ids() const;

    /// Collision remediation: replace the user's transform salt with a fresh
    /// draw. Updates the entry and the PHR root.
    PhrEntry redraw_transform_salt(const std::string& user_id);

private:
    void rebuild();

    std::map<std::string, PhrRecord> records_;
    std::map<std::string, PhrEntry> entries_;
    std::vector<std::vector<Digest256>> levels_; // levels_[0] = sorted padded leaves
};

/// One synthetic participant value (CAG repeat count for the HD study).
struct CohortRecord {
    std::string user_id;
    double value;
};

struct HdCohorts {
    std::vector<CohortRecord> healthy;
    std::vector<CohortRecord> hd;
};

/// Two 50-person cohorts: healthy counts round(Normal(17,3)) clamped to
/// [6,35], HD counts round(Normal(43,4)) clamped to [36,120]. Values are
/// deterministic per seed; salts are drawn fresh at registration time.
HdCohorts generate_hd_cohorts(std::uint64_t seed);

/// Deterministic normal draw stream (mt19937_64 + Box-Muller). The engine
/// sequence is pinned by the standard, so cohort fixtures reproduce across
/// implementations.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double next(double mean, double stddev);
    double next_uniform(); // in (0, 1]

private:
    std::mt19937_64 engine_;
};

} // namespace csmt
