#include "csmt/digest.hpp"

#include "csmt/errors.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

namespace csmt {

Digest256 hash_node(std::span<const std::uint8_t> data) {
    Digest256 out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.bytes.size()) {
        raise(errc::crypto_failure, "EVP_Digest(SHA-256) failed");
    }
    return out;
}

Digest256 hash_node(const Bytes& data) {
    return hash_node(std::span<const std::uint8_t>(data.data(), data.size()));
}

Digest256 hash_bit(bool bit) {
    const std::uint8_t b = bit ? 1 : 0;
    return hash_node(std::span<const std::uint8_t>(&b, 1));
}

static char nibble(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(nibble(b >> 4));
        out.push_back(nibble(b & 0xf));
    }
    return out;
}

static unsigned unhex_digit(char c) {
    if (c >= '0' && c <= '9') return unsigned(c - '0');
    if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return unsigned(c - 'A' + 10);
    raise(errc::bad_request, "invalid hex digit");
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) raise(errc::bad_request, "odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::uint8_t((unhex_digit(hex[2 * i]) << 4) | unhex_digit(hex[2 * i + 1]));
    }
    return out;
}

std::string Digest256::hex() const { return to_hex(bytes); }

Digest256 Digest256::from_hex(const std::string& hex) {
    Bytes raw = csmt::from_hex(hex);
    if (raw.size() != 32) raise(errc::bad_request, "digest hex must decode to 32 bytes");
    Digest256 d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
}

Bytes random_bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
        raise(errc::crypto_failure, "RAND_bytes failed");
    }
    return out;
}

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::serialization_overflow: return "serialization-overflow";
        case errc::quantization_overflow: return "quantization-overflow";
        case errc::aggregation_overflow: return "aggregation-overflow";
        case errc::out_of_range: return "out-of-range";
        case errc::shape_mismatch: return "shape-mismatch";
        case errc::scale_mismatch: return "scale-mismatch";
        case errc::leaf_collision: return "leaf-collision";
        case errc::duplicate_entry: return "duplicate-entry";
        case errc::not_found: return "not-found";
        case errc::not_built: return "not-built";
        case errc::division_by_zero: return "division-by-zero";
        case errc::index_mismatch: return "index-mismatch";
        case errc::witness_mismatch: return "witness-mismatch";
        case errc::key_kind: return "key-kind";
        case errc::unknown_circuit: return "unknown-circuit";
        case errc::incomplete_bundle: return "incomplete-bundle";
        case errc::io_failure: return "io-failure";
        case errc::crypto_failure: return "crypto-failure";
        case errc::transport_failure: return "transport-failure";
        case errc::bad_request: return "bad-request";
    }
    return "unknown-error";
}

} // namespace csmt
