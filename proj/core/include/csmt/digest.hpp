#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace csmt {

using Bytes = std::vector<std::uint8_t>;

/// 32-byte digest of the fixed protocol hash (SHA-256). Equality is byte
/// equality; ordering enables use as a map key.
struct Digest256 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest256&) const = default;

    std::string hex() const;
    static Digest256 from_hex(const std::string& hex);
};

/// SHA-256 over an arbitrary byte string.
Digest256 hash_node(std::span<const std::uint8_t> data);
Digest256 hash_node(const Bytes& data);

/// Digest of a single selector bit (the byte 0x00 or 0x01).
Digest256 hash_bit(bool bit);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(const std::string& hex);

/// Cryptographically secure random bytes (OpenSSL RAND_bytes).
Bytes random_bytes(std::size_t n);

struct DigestHasher {
    std::size_t operator()(const Digest256& d) const noexcept {
        std::size_t out;
        static_assert(sizeof(out) <= 32);
        __builtin_memcpy(&out, d.bytes.data(), sizeof(out));
        return out;
    }
};

} // namespace csmt
