#include "csmt/index.hpp"

#include "csmt/errors.hpp"

#include <string>

namespace csmt {

LeafIndex LeafIndex::from_digest(const Digest256& digest, unsigned height) {
    if (height < 1 || height > 256) raise(errc::out_of_range, "height must be in [1, 256]");
    LeafIndex out;
    out.height_ = height;
    out.packed_ = digest.bytes;
    // zero everything below the top `height` bits
    for (unsigned i = height; i < 256; ++i) {
        out.packed_[i / 8] &= std::uint8_t(~(0x80u >> (i % 8)));
    }
    return out;
}

LeafIndex LeafIndex::from_value(std::uint64_t value, unsigned height) {
    if (height < 1 || height > 64) raise(errc::out_of_range, "height must be in [1, 64]");
    if (height < 64 && value >= (std::uint64_t(1) << height)) {
        raise(errc::out_of_range, "index " + std::to_string(value) + " >= 2^" + std::to_string(height));
    }
    LeafIndex out;
    out.height_ = height;
    for (unsigned i = 0; i < height; ++i) {
        const bool bit = (value >> (height - 1 - i)) & 1;
        if (bit) out.packed_[i / 8] |= std::uint8_t(0x80u >> (i % 8));
    }
    return out;
}

bool LeafIndex::bit_from_root(unsigned i) const {
    if (i >= height_) raise(errc::out_of_range, "bit position beyond height");
    return (packed_[i / 8] >> (7 - (i % 8))) & 1;
}

std::uint64_t LeafIndex::value() const {
    if (height_ > 64) raise(errc::out_of_range, "index value needs height <= 64");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < height_; ++i) v = (v << 1) | std::uint64_t(bit_from_root(i));
    return v;
}

LeafIndex derive_leaf_index(const Digest256& digest, unsigned height) {
    return LeafIndex::from_digest(digest, height);
}

BinaryPath index_to_path(const LeafIndex& index) {
    BinaryPath path;
    path.bits.resize(index.height());
    for (unsigned i = 0; i < index.height(); ++i) path.bits[i] = index.bit_from_root(i) ? 1 : 0;
    return path;
}

BinaryPath index_to_path(std::uint64_t index, unsigned height) {
    return index_to_path(LeafIndex::from_value(index, height));
}

std::uint64_t path_to_value(const BinaryPath& path) {
    if (path.size() > 64) raise(errc::out_of_range, "path refold needs size <= 64");
    std::uint64_t v = 0;
    for (std::uint8_t b : path.bits) v = (v << 1) | std::uint64_t(b & 1);
    return v;
}

} // namespace csmt
