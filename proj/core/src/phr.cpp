#include "csmt/phr.hpp"

#include "csmt/errors.hpp"
#include "csmt/serialize.hpp"

#include <algorithm>
#include <cmath>

namespace csmt {

namespace {
constexpr std::uint8_t kPhrLeafTag = 0x00;
constexpr std::uint8_t kPhrInteriorTag = 0x01;

Digest256 interior_digest(const Digest256& left, const Digest256& right) {
    CanonicalWriter w;
    w.add_u8(kPhrInteriorTag);
    w.add_digest(left);
    w.add_digest(right);
    return hash_node(w.bytes());
}
} // namespace

Digest256 phr_leaf_digest(const Digest256& h_raw, const Digest256& h_tau) {
    CanonicalWriter w;
    w.add_u8(kPhrLeafTag);
    w.add_digest(h_raw);
    w.add_digest(h_tau);
    return hash_node(w.bytes());
}

bool phr_verify_membership(const Digest256& root, const MerkleAuditPath& path) {
    if (path.siblings.size() != path.directions.size()) return false;
    Digest256 cur = path.leaf_digest;
    for (std::size_t i = 0; i < path.siblings.size(); ++i) {
        cur = path.directions[i] ? interior_digest(path.siblings[i], cur)
                                 : interior_digest(cur, path.siblings[i]);
    }
    return cur == path.root && cur == root;
}

PhrEntry PhrStore::register_record(const std::string& user_id, std::vector<double> datum,
                                   const UserSalt& mu, const TransformSalt& tau) {
    if (user_id.empty()) raise(errc::bad_request, "user id must be non-empty");
    if (records_.count(user_id)) raise(errc::duplicate_entry, "user '" + user_id + "' already registered");
    PhrEntry entry{record_digest(datum, mu), tau_digest(tau), user_id};
    for (const auto& [id, other] : entries_) {
        if (other.h_raw == entry.h_raw && other.h_tau == entry.h_tau) {
            raise(errc::duplicate_entry, "record tuple already present under user '" + id + "'");
        }
    }
    records_.emplace(user_id, PhrRecord{user_id, std::move(datum), mu, tau});
    entries_.emplace(user_id, entry);
    rebuild();
    return entry;
}

PhrEntry PhrStore::register_record(const std::string& user_id, std::vector<double> datum) {
    return register_record(user_id, std::move(datum), random_user_salt(), random_transform_salt());
}

const PhrRecord& PhrStore::record(const std::string& user_id) const {
    auto it = records_.find(user_id);
    if (it == records_.end()) raise(errc::not_found, "user '" + user_id + "' not registered");
    return it->second;
}

const PhrEntry& PhrStore::entry(const std::string& user_id) const {
    auto it = entries_.find(user_id);
    if (it == entries_.end()) raise(errc::not_found, "user '" + user_id + "' not registered");
    return it->second;
}

std::optional<PhrEntry> PhrStore::find_entry(const Digest256& h_raw, const Digest256& h_tau) const {
    for (const auto& [id, entry] : entries_) {
        if (entry.h_raw == h_raw && entry.h_tau == h_tau) return entry;
    }
    return std::nullopt;
}

void PhrStore::rebuild() {
    levels_.clear();
    std::vector<Digest256> leaves;
    leaves.reserve(entries_.size());
    for (const auto& [id, entry] : entries_) leaves.push_back(phr_leaf_digest(entry.h_raw, entry.h_tau));
    std::sort(leaves.begin(), leaves.end());
    if (leaves.empty()) return;
    while ((leaves.size() & (leaves.size() - 1)) != 0) leaves.push_back(leaves.back());
    levels_.push_back(std::move(leaves));
    while (levels_.back().size() > 1) {
        const std::vector<Digest256>& prev = levels_.back();
        std::vector<Digest256> next(prev.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = interior_digest(prev[2 * i], prev[2 * i + 1]);
        }
        levels_.push_back(std::move(next));
    }
}

const Digest256& PhrStore::root() const {
    if (levels_.empty()) raise(errc::not_found, "PHR store is empty");
    return levels_.back()[0];
}

std::vector<std::string> PhrStore::user_ids() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_) out.push_back(id);
    return out;
}

MerkleAuditPath PhrStore::prove_membership(const Digest256& h_raw, const Digest256& h_tau) const {
    if (!find_entry(h_raw, h_tau)) raise(errc::not_found, "record tuple not registered");
    const Digest256 leaf = phr_leaf_digest(h_raw, h_tau);
    const std::vector<Digest256>& leaves = levels_.front();
    const auto it = std::lower_bound(leaves.begin(), leaves.end(), leaf);
    std::size_t pos = std::size_t(it - leaves.begin());

    MerkleAuditPath path;
    path.leaf_digest = leaf;
    path.root = root();
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
        const std::size_t sibling = pos ^ 1;
        path.siblings.push_back(levels_[level][sibling]);
        path.directions.push_back(std::uint8_t(pos & 1));
        pos >>= 1;
    }
    return path;
}

PhrEntry PhrStore::redraw_transform_salt(const std::string& user_id) {
    auto it = records_.find(user_id);
    if (it == records_.end()) raise(errc::not_found, "user '" + user_id + "' not registered");
    it->second.tau = random_transform_salt();
    PhrEntry entry{record_digest(it->second.datum, it->second.mu), tau_digest(it->second.tau), user_id};
    entries_[user_id] = entry;
    rebuild();
    return entry;
}

double NormalSampler::next_uniform() {
    // (0, 1]: 53-bit mantissa, never zero
    return (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalSampler::next(double mean, double stddev) {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
}

HdCohorts generate_hd_cohorts(std::uint64_t seed) {
    NormalSampler sampler(seed);
    HdCohorts out;
    auto draw = [&](double mean, double sd, double lo, double hi) {
        double v = std::nearbyint(sampler.next(mean, sd));
        return std::clamp(v, lo, hi);
    };
    for (int i = 1; i <= 50; ++i) {
        out.healthy.push_back({"healthy-" + std::to_string(i), draw(17.0, 3.0, 6.0, 35.0)});
    }
    for (int i = 1; i <= 50; ++i) {
        out.hd.push_back({"hd-" + std::to_string(i), draw(43.0, 4.0, 36.0, 120.0)});
    }
    return out;
}

} // namespace csmt
