#include "csmt/bulletin.hpp"

#include "csmt/errors.hpp"
#include "csmt/json_io.hpp"
#include "csmt/serialize.hpp"

#include <openssl/evp.h>

#include <fstream>

namespace csmt {

Bytes bulletin_signing_bytes(const BulletinRecord& record) {
    CanonicalWriter w;
    w.add_string("bulletin-record");
    w.add_string(record.study_id);
    for (const auto& [label, digest] : record.roots) {
        w.add_string(label);
        w.add_digest(digest);
    }
    for (const auto& [name, fingerprint] : record.vk_fingerprints) {
        w.add_string(name);
        w.add_digest(fingerprint);
    }
    w.add_digest(record.phr_root);
    w.add_string(record.timestamp);
    w.add_bytes(record.signer);
    return w.take();
}

BulletinSigner BulletinSigner::generate() {
    EVP_PKEY* pkey = nullptr;
    EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr);
    if (!ctx || EVP_PKEY_keygen_init(ctx) != 1 || EVP_PKEY_keygen(ctx, &pkey) != 1) {
        EVP_PKEY_CTX_free(ctx);
        raise(errc::crypto_failure, "Ed25519 key generation failed");
    }
    EVP_PKEY_CTX_free(ctx);
    BulletinSigner signer;
    std::size_t len = 32;
    signer.private_key.resize(len);
    signer.public_key.resize(len);
    const bool ok = EVP_PKEY_get_raw_private_key(pkey, signer.private_key.data(), &len) == 1 &&
                    len == 32 &&
                    EVP_PKEY_get_raw_public_key(pkey, signer.public_key.data(), &len) == 1 &&
                    len == 32;
    EVP_PKEY_free(pkey);
    if (!ok) raise(errc::crypto_failure, "Ed25519 key extraction failed");
    return signer;
}

BulletinSigner BulletinSigner::from_private_key(const Bytes& private_key) {
    if (private_key.size() != 32) raise(errc::crypto_failure, "Ed25519 private key must be 32 bytes");
    EVP_PKEY* pkey = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, private_key.data(),
                                                  private_key.size());
    if (!pkey) raise(errc::crypto_failure, "invalid Ed25519 private key");
    BulletinSigner signer;
    signer.private_key = private_key;
    std::size_t len = 32;
    signer.public_key.resize(len);
    const bool ok = EVP_PKEY_get_raw_public_key(pkey, signer.public_key.data(), &len) == 1 && len == 32;
    EVP_PKEY_free(pkey);
    if (!ok) raise(errc::crypto_failure, "Ed25519 public key derivation failed");
    return signer;
}

void sign_bulletin_record(BulletinRecord& record, const BulletinSigner& signer) {
    record.signer = signer.public_key;
    const Bytes message = bulletin_signing_bytes(record);

    EVP_PKEY* pkey = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                                  signer.private_key.data(),
                                                  signer.private_key.size());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    std::size_t sig_len = 64;
    record.signature.resize(sig_len);
    const bool ok = pkey && ctx && EVP_DigestSignInit(ctx, nullptr, nullptr, nullptr, pkey) == 1 &&
                    EVP_DigestSign(ctx, record.signature.data(), &sig_len, message.data(),
                                   message.size()) == 1 &&
                    sig_len == 64;
    EVP_MD_CTX_free(ctx);
    EVP_PKEY_free(pkey);
    if (!ok) raise(errc::crypto_failure, "bulletin record signing failed");
}

bool verify_bulletin_record(const BulletinRecord& record) {
    if (record.signer.size() != 32 || record.signature.size() != 64) return false;
    const Bytes message = bulletin_signing_bytes(record);
    EVP_PKEY* pkey = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, record.signer.data(),
                                                 record.signer.size());
    if (!pkey) return false;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx && EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, pkey) == 1 &&
                    EVP_DigestVerify(ctx, record.signature.data(), record.signature.size(),
                                     message.data(), message.size()) == 1;
    EVP_MD_CTX_free(ctx);
    EVP_PKEY_free(pkey);
    return ok;
}

const BulletinRecord& BulletinLog::publish(BulletinRecord record) {
    if (record.study_id.empty()) raise(errc::bad_request, "study id must be non-empty");
    if (find(record.study_id)) {
        raise(errc::duplicate_entry, "study '" + record.study_id + "' already published");
    }
    records_.push_back(std::move(record));
    return records_.back();
}

const BulletinRecord* BulletinLog::find(const std::string& study_id) const {
    for (const BulletinRecord& r : records_) {
        if (r.study_id == study_id) return &r;
    }
    return nullptr;
}

namespace {

io::json record_to_json(const BulletinRecord& r) {
    io::json roots = io::json::array();
    for (const auto& [label, digest] : r.roots) {
        roots.push_back(io::json{{"label", label}, {"root", digest.hex()}});
    }
    io::json vks = io::json::array();
    for (const auto& [name, fp] : r.vk_fingerprints) {
        vks.push_back(io::json{{"name", name}, {"fingerprint", fp.hex()}});
    }
    return io::json{
        {"study_id", r.study_id},
        {"roots", roots},
        {"vk_fingerprints", vks},
        {"phr_root", r.phr_root.hex()},
        {"timestamp", r.timestamp},
        {"signer", to_hex(std::span<const std::uint8_t>(r.signer.data(), r.signer.size()))},
        {"signature",
         to_hex(std::span<const std::uint8_t>(r.signature.data(), r.signature.size()))}};
}

BulletinRecord record_from_json(const io::json& j) {
    BulletinRecord r;
    r.study_id = j.at("study_id").get<std::string>();
    for (const io::json& e : j.at("roots")) {
        r.roots.emplace_back(e.at("label").get<std::string>(),
                             Digest256::from_hex(e.at("root").get<std::string>()));
    }
    for (const io::json& e : j.at("vk_fingerprints")) {
        r.vk_fingerprints.emplace_back(e.at("name").get<std::string>(),
                                       Digest256::from_hex(e.at("fingerprint").get<std::string>()));
    }
    r.phr_root = Digest256::from_hex(j.at("phr_root").get<std::string>());
    r.timestamp = j.at("timestamp").get<std::string>();
    r.signer = from_hex(j.value("signer", std::string{}));
    r.signature = from_hex(j.value("signature", std::string{}));
    return r;
}

} // namespace

void BulletinLog::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot open '" + path.string() + "' for writing");
    for (const BulletinRecord& r : records_) out << record_to_json(r).dump() << '\n';
}

BulletinLog BulletinLog::load(const std::filesystem::path& path) {
    BulletinLog log;
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.records_.push_back(record_from_json(io::json::parse(line)));
    }
    return log;
}

// json adapters shared with the study store
namespace io {
json bulletin_record_to_json(const BulletinRecord& r) { return record_to_json(r); }
BulletinRecord bulletin_record_from_json(const json& j) { return record_from_json(j); }
} // namespace io

} // namespace csmt
