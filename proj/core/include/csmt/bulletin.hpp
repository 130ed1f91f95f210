#pragma once

#include "csmt/digest.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace csmt {

/// One append-only public record: the study's roots, key fingerprints and
/// the PHR root at publication time, signed by the publishing organization.
struct BulletinRecord {
    std::string study_id;
    std::vector<std::pair<std::string, Digest256>> roots;            // tree label -> root
    std::vector<std::pair<std::string, Digest256>> vk_fingerprints;  // key name -> fingerprint
    Digest256 phr_root;
    std::string timestamp;
    Bytes signer;    // Ed25519 public key (32 bytes)
    Bytes signature; // Ed25519 signature over the canonical record bytes

    bool operator==(const BulletinRecord&) const = default;
};

/// Canonical byte image covered by the record signature (everything except
/// the signature itself).
Bytes bulletin_signing_bytes(const BulletinRecord& record);

/// Ed25519 signing identity of the publishing organization.
struct BulletinSigner {
    Bytes private_key; // 32 raw bytes
    Bytes public_key;  // 32 raw bytes

    static BulletinSigner generate();
    static BulletinSigner from_private_key(const Bytes& private_key);
};

void sign_bulletin_record(BulletinRecord& record, const BulletinSigner& signer);
bool verify_bulletin_record(const BulletinRecord& record);

/// Append-only bulletin. Records are immutable once published; re-publishing
/// a study id is rejected.
class BulletinLog {
public:
    const BulletinRecord& publish(BulletinRecord record);
    const BulletinRecord* find(const std::string& study_id) const;
    const std::vector<BulletinRecord>& records() const { return records_; }

    void save(const std::filesystem::path& path) const;
    static BulletinLog load(const std::filesystem::path& path);

private:
    std::vector<BulletinRecord> records_;
};

} // namespace csmt
