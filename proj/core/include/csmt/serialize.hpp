#pragma once

#include "csmt/digest.hpp"
#include "csmt/fixed_point.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace csmt {

/// Canonical wire encoding used for every hash input in the protocol:
/// one version byte, then each field as a 4-byte little-endian length
/// prefix followed by its content. FixedPoint content is the 8-byte
/// little-endian two's-complement raw value plus one scale byte.
inline constexpr std::uint8_t kSerializationVersion = 0x01;

class CanonicalWriter {
public:
    CanonicalWriter() { out_.push_back(kSerializationVersion); }

    CanonicalWriter& add_bytes(std::span<const std::uint8_t> content);
    CanonicalWriter& add_bytes(const Bytes& content) {
        return add_bytes(std::span<const std::uint8_t>(content.data(), content.size()));
    }
    CanonicalWriter& add_string(std::string_view s);
    CanonicalWriter& add_fixed(const FixedPoint& f);
    CanonicalWriter& add_digest(const Digest256& d) { return add_bytes(d.bytes); }
    CanonicalWriter& add_u32(std::uint32_t v);
    CanonicalWriter& add_u8(std::uint8_t v);

    /// Each double as its 8-byte little-endian IEEE-754 image, one field.
    CanonicalWriter& add_doubles(std::span<const double> values);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

/// Fields: each payload entry as a FixedPoint field.
Bytes serialize_payload(std::span<const FixedPoint> payload);

} // namespace csmt
