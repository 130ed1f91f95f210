#include "csmt/serialize.hpp"

#include "csmt/errors.hpp"

#include <cstring>
#include <limits>

namespace csmt {

static void append_u32le(Bytes& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 24));
}

CanonicalWriter& CanonicalWriter::add_bytes(std::span<const std::uint8_t> content) {
    if (content.size() > std::numeric_limits<std::uint32_t>::max()) {
        raise(errc::serialization_overflow, "field exceeds 2^32-1 bytes");
    }
    append_u32le(out_, std::uint32_t(content.size()));
    out_.insert(out_.end(), content.begin(), content.end());
    return *this;
}

CanonicalWriter& CanonicalWriter::add_string(std::string_view s) {
    return add_bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

CanonicalWriter& CanonicalWriter::add_fixed(const FixedPoint& f) {
    append_u32le(out_, 9);
    std::uint64_t u = static_cast<std::uint64_t>(f.raw);
    for (int i = 0; i < 8; ++i) out_.push_back(std::uint8_t(u >> (8 * i)));
    out_.push_back(f.scale);
    return *this;
}

CanonicalWriter& CanonicalWriter::add_u32(std::uint32_t v) {
    append_u32le(out_, 4);
    append_u32le(out_, v);
    return *this;
}

CanonicalWriter& CanonicalWriter::add_u8(std::uint8_t v) {
    append_u32le(out_, 1);
    out_.push_back(v);
    return *this;
}

CanonicalWriter& CanonicalWriter::add_doubles(std::span<const double> values) {
    for (double d : values) {
        std::uint64_t u;
        std::memcpy(&u, &d, sizeof(u));
        Bytes field(8);
        for (int i = 0; i < 8; ++i) field[std::size_t(i)] = std::uint8_t(u >> (8 * i));
        add_bytes(field);
    }
    return *this;
}

Bytes serialize_payload(std::span<const FixedPoint> payload) {
    CanonicalWriter w;
    for (const FixedPoint& f : payload) w.add_fixed(f);
    return w.take();
}

} // namespace csmt
