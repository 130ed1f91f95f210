#pragma once

#include "csmt/proof.hpp"
#include "csmt/tree.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace csmt {

/// Lookup key for a stored leaf-transform witness: the salted record hash,
/// the transform-salt hash, and the circuit the witness belongs to.
struct LtrWitnessKey {
    Digest256 h_raw;
    Digest256 h_tau;
    Digest256 circuit_digest;

    auto operator<=>(const LtrWitnessKey&) const = default;
};

struct StoredLtrWitness {
    std::string user_id;
    LtrWitness witness;
    LeafValue leaf;
    Digest256 leaf_digest;
};

struct StoredTree {
    std::string study_id;
    std::string label;
    CircuitId ltr_circuit;
    CircuitId mrp_circuit;
    std::shared_ptr<const Tree> tree;
};

/// CRO-private witness store. Retrieval is by exact key only; contents are
/// never served over an external interface. At-rest persistence is a single
/// AES-256-GCM encrypted file keyed from deployment configuration.
class WitnessStore {
public:
    /// Idempotent for identical payloads; conflicting re-insert is an error.
    void put_ltr(const LtrWitnessKey& key, StoredLtrWitness witness);
    const StoredLtrWitness* find_ltr(const LtrWitnessKey& key) const;
    std::size_t ltr_count() const { return ltr_.size(); }

    void put_tree(StoredTree tree);
    const StoredTree* find_tree(const Digest256& root_digest) const;
    std::vector<const StoredTree*> trees() const;
    std::size_t tree_count() const { return trees_.size(); }

    void save(const std::filesystem::path& path, std::span<const std::uint8_t> key32) const;
    static WitnessStore load(const std::filesystem::path& path, std::span<const std::uint8_t> key32,
                             const Registry& registry);

private:
    std::map<LtrWitnessKey, StoredLtrWitness> ltr_;
    std::map<Digest256, StoredTree> trees_;
};

/// AES-256-GCM seal/open used for the witness store file.
Bytes aead_seal(std::span<const std::uint8_t> key32, const Bytes& plaintext);
Bytes aead_open(std::span<const std::uint8_t> key32, const Bytes& sealed);

} // namespace csmt
