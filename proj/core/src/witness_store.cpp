#include "csmt/witness_store.hpp"

#include "csmt/errors.hpp"
#include "csmt/json_io.hpp"

#include <openssl/evp.h>

#include <cstring>

namespace csmt {

namespace {
constexpr char kStoreMagic[8] = {'C', 'S', 'M', 'T', 'W', 'S', '0', '1'};
constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

bool ltr_equal(const StoredLtrWitness& a, const StoredLtrWitness& b) {
    return a.user_id == b.user_id && a.witness.datum == b.witness.datum &&
           a.witness.mu == b.witness.mu && a.witness.tau == b.witness.tau && a.leaf == b.leaf &&
           a.leaf_digest == b.leaf_digest;
}
} // namespace

void WitnessStore::put_ltr(const LtrWitnessKey& key, StoredLtrWitness witness) {
    auto it = ltr_.find(key);
    if (it != ltr_.end()) {
        if (!ltr_equal(it->second, witness)) {
            raise(errc::duplicate_entry, "conflicting witness for an existing key");
        }
        return;
    }
    ltr_.emplace(key, std::move(witness));
}

const StoredLtrWitness* WitnessStore::find_ltr(const LtrWitnessKey& key) const {
    auto it = ltr_.find(key);
    return it == ltr_.end() ? nullptr : &it->second;
}

void WitnessStore::put_tree(StoredTree tree) {
    if (!tree.tree) raise(errc::bad_request, "null tree");
    trees_[tree.tree->root_digest()] = std::move(tree);
}

const StoredTree* WitnessStore::find_tree(const Digest256& root_digest) const {
    auto it = trees_.find(root_digest);
    return it == trees_.end() ? nullptr : &it->second;
}

std::vector<const StoredTree*> WitnessStore::trees() const {
    std::vector<const StoredTree*> out;
    out.reserve(trees_.size());
    for (const auto& [root, tree] : trees_) out.push_back(&tree);
    return out;
}

Bytes aead_seal(std::span<const std::uint8_t> key32, const Bytes& plaintext) {
    if (key32.size() != 32) raise(errc::crypto_failure, "store key must be 32 bytes");
    Bytes nonce = random_bytes(kNonceLen);
    Bytes out;
    out.insert(out.end(), kStoreMagic, kStoreMagic + sizeof(kStoreMagic));
    out.insert(out.end(), nonce.begin(), nonce.end());
    out.resize(out.size() + kTagLen); // tag filled below
    const std::size_t cipher_off = out.size();
    out.resize(cipher_off + plaintext.size());

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) raise(errc::crypto_failure, "EVP_CIPHER_CTX_new failed");
    int len = 0;
    bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key32.data(), nonce.data()) == 1 &&
              (plaintext.empty() ||
               EVP_EncryptUpdate(ctx, out.data() + cipher_off, &len, plaintext.data(),
                                 int(plaintext.size())) == 1) &&
              EVP_EncryptFinal_ex(ctx, out.data() + cipher_off + len, &len) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kTagLen,
                                  out.data() + sizeof(kStoreMagic) + kNonceLen) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) raise(errc::crypto_failure, "AES-256-GCM seal failed");
    return out;
}

Bytes aead_open(std::span<const std::uint8_t> key32, const Bytes& sealed) {
    if (key32.size() != 32) raise(errc::crypto_failure, "store key must be 32 bytes");
    const std::size_t header = sizeof(kStoreMagic) + kNonceLen + kTagLen;
    if (sealed.size() < header || std::memcmp(sealed.data(), kStoreMagic, sizeof(kStoreMagic)) != 0) {
        raise(errc::crypto_failure, "not a witness store file");
    }
    const std::uint8_t* nonce = sealed.data() + sizeof(kStoreMagic);
    Bytes tag(sealed.begin() + sizeof(kStoreMagic) + kNonceLen, sealed.begin() + long(header));
    const std::uint8_t* cipher = sealed.data() + header;
    const std::size_t cipher_len = sealed.size() - header;

    Bytes plain(cipher_len);
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) raise(errc::crypto_failure, "EVP_CIPHER_CTX_new failed");
    int len = 0;
    bool ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key32.data(), nonce) == 1 &&
              (cipher_len == 0 ||
               EVP_DecryptUpdate(ctx, plain.data(), &len, cipher, int(cipher_len)) == 1) &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kTagLen, tag.data()) == 1 &&
              EVP_DecryptFinal_ex(ctx, plain.data() + len, &len) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) raise(errc::crypto_failure, "witness store authentication failed");
    return plain;
}

void WitnessStore::save(const std::filesystem::path& path,
                        std::span<const std::uint8_t> key32) const {
    io::json ltr = io::json::array();
    for (const auto& [key, stored] : ltr_) {
        io::json entry{
            {"h_raw", key.h_raw.hex()},
            {"h_tau", key.h_tau.hex()},
            {"circuit_digest", key.circuit_digest.hex()},
            {"user_id", stored.user_id},
            {"datum", stored.witness.datum},
            {"mu", to_hex(std::span<const std::uint8_t>(stored.witness.mu.bytes.data(), kSaltLen))},
            {"tau", to_hex(std::span<const std::uint8_t>(stored.witness.tau.bytes.data(), kSaltLen))},
            {"leaf", io::leaf_to_json(stored.leaf)},
            {"leaf_digest", stored.leaf_digest.hex()},
        };
        ltr.push_back(std::move(entry));
    }
    io::json trees = io::json::array();
    for (const auto& [root, stored] : trees_) {
        trees.push_back(io::json{{"study_id", stored.study_id},
                                 {"label", stored.label},
                                 {"ltr_circuit", io::circuit_to_json(stored.ltr_circuit)},
                                 {"mrp_circuit", io::circuit_to_json(stored.mrp_circuit)},
                                 {"tree", io::tree_to_json(*stored.tree)}});
    }
    io::json doc{{"version", 1}, {"ltr", ltr}, {"trees", trees}};
    const std::string text = doc.dump();
    Bytes plain(text.begin(), text.end());
    io::write_bytes_file(path, aead_seal(key32, plain));
}

WitnessStore WitnessStore::load(const std::filesystem::path& path,
                                std::span<const std::uint8_t> key32, const Registry& registry) {
    const Bytes sealed = io::read_bytes_file(path);
    const Bytes plain = aead_open(key32, sealed);
    io::json doc = io::json::parse(plain.begin(), plain.end());

    WitnessStore store;
    for (const io::json& e : doc.at("ltr")) {
        LtrWitnessKey key{Digest256::from_hex(e.at("h_raw").get<std::string>()),
                          Digest256::from_hex(e.at("h_tau").get<std::string>()),
                          Digest256::from_hex(e.at("circuit_digest").get<std::string>())};
        StoredLtrWitness stored;
        stored.user_id = e.at("user_id").get<std::string>();
        stored.witness.datum = e.at("datum").get<std::vector<double>>();
        Bytes mu = from_hex(e.at("mu").get<std::string>());
        Bytes tau = from_hex(e.at("tau").get<std::string>());
        if (mu.size() != kSaltLen || tau.size() != kSaltLen) {
            raise(errc::io_failure, "corrupt salt in witness store");
        }
        std::copy(mu.begin(), mu.end(), stored.witness.mu.bytes.begin());
        std::copy(tau.begin(), tau.end(), stored.witness.tau.bytes.begin());
        stored.leaf = io::leaf_from_json(e.at("leaf"));
        stored.leaf_digest = Digest256::from_hex(e.at("leaf_digest").get<std::string>());
        store.put_ltr(key, std::move(stored));
    }
    for (const io::json& e : doc.at("trees")) {
        StoredTree stored;
        stored.study_id = e.at("study_id").get<std::string>();
        stored.label = e.at("label").get<std::string>();
        stored.ltr_circuit = io::circuit_from_json(e.at("ltr_circuit"));
        stored.mrp_circuit = io::circuit_from_json(e.at("mrp_circuit"));
        stored.tree = std::make_shared<Tree>(io::tree_from_json(registry, e.at("tree")));
        store.put_tree(std::move(stored));
    }
    return store;
}

} // namespace csmt
