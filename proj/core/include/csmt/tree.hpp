#pragma once

#include "csmt/index.hpp"
#include "csmt/transform.hpp"

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

namespace csmt {

struct TreeConfig {
    unsigned height = 16; // K; materialized trees stay in [1, 32]
    std::string transform_id;
    std::string aggregator_id = kSumAggregatorId;
    unsigned scale = 8;
};

/// Sparse computational Merkle tree. Untouched subtrees are represented by
/// the per-level default chain, so memory is O(n * K) instead of 2^K.
/// A built tree is immutable and safe for concurrent readers.
class Tree {
public:
    /// Bottom-up build over the occupied leaf slots. Duplicate indices with
    /// differing values are a leaf-collision error; identical duplicates are
    /// merged.
    static Tree build(const Registry& registry, TreeConfig config,
                      const std::vector<std::pair<std::uint64_t, LeafValue>>& leaves);

    const TreeConfig& config() const { return config_; }
    unsigned height() const { return config_.height; }

    const NodeValue& root() const { return root_; }
    const Digest256& root_digest() const { return root_.digest; }

    /// Node at (level, position); level 0 = leaves, level K = root.
    /// Positions inside untouched subtrees resolve to the default chain.
    const NodeValue& node_at(unsigned level, std::uint64_t position) const;

    /// Sibling of the path node at each level, leaf side first (K entries).
    std::vector<NodeValue> siblings_along_path(const LeafIndex& index) const;

    bool is_occupied(std::uint64_t index) const { return occupied_.count(index) != 0; }
    const std::map<std::uint64_t, LeafValue>& occupied() const { return occupied_; }

    /// default_chain()[k] is the value of an untouched node at level k;
    /// entry k+1 is the self-aggregation of entry k.
    const std::vector<NodeValue>& default_chain() const { return default_chain_; }

    static std::vector<NodeValue> compute_default_chain(const Registry& registry,
                                                        const TreeConfig& config);

private:
    TreeConfig config_;
    std::map<std::uint64_t, LeafValue> occupied_;
    std::vector<NodeValue> default_chain_;                              // K+1 entries
    std::vector<std::unordered_map<std::uint64_t, NodeValue>> levels_;  // materialized nodes
    NodeValue root_;
};

} // namespace csmt
