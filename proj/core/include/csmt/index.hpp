#pragma once

#include "csmt/digest.hpp"

#include <compare>
#include <cstdint>
#include <vector>

namespace csmt {

/// Root-to-leaf branch directions: bits[0] selects the child of the root,
/// 0 = left, 1 = right. Length equals the tree height K.
struct BinaryPath {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    bool operator==(const BinaryPath&) const = default;
};

/// Position of a leaf in a height-K tree: the top K bits of a digest,
/// interpreted big-endian. Kept in packed form so K may reach the full
/// digest width; value() is available whenever K <= 64 (all materialized
/// trees are far below that).
class LeafIndex {
public:
    LeafIndex() = default;

    static LeafIndex from_digest(const Digest256& digest, unsigned height);
    static LeafIndex from_value(std::uint64_t value, unsigned height);

    unsigned height() const { return height_; }

    /// Branch direction i steps below the root, i in [0, height).
    bool bit_from_root(unsigned i) const;

    /// Child side of the path node at the given level (level 0 = leaf).
    bool branch_bit_at_level(unsigned level) const { return bit_from_root(height_ - 1 - level); }

    std::uint64_t value() const;

    const std::array<std::uint8_t, 32>& packed() const { return packed_; }

    auto operator<=>(const LeafIndex&) const = default;

private:
    std::array<std::uint8_t, 32> packed_{}; // top bits of the digest, left-aligned
    unsigned height_ = 0;
};

/// Top-K digest bits as the leaf position; requires 1 <= K <= 256.
LeafIndex derive_leaf_index(const Digest256& digest, unsigned height);

BinaryPath index_to_path(const LeafIndex& index);

/// Big-endian K-bit expansion of an integer index; index must be < 2^K.
BinaryPath index_to_path(std::uint64_t index, unsigned height);

/// Refold a path to its integer index (requires size <= 64).
std::uint64_t path_to_value(const BinaryPath& path);

} // namespace csmt
