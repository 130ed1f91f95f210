#pragma once

#include <cstdint>
#include <compare>

namespace csmt {

/// Two's-complement fixed-point value: the represented number is raw / 2^scale.
/// Values are only combined when scales match.
struct FixedPoint {
    std::int64_t raw = 0;
    std::uint8_t scale = 0;

    auto operator<=>(const FixedPoint&) const = default;

    double decode() const;
};

inline constexpr int kMaxScale = 62;

/// Quantize x at the given scale with round-half-to-even.
/// Requires scale in [0, 62] and |x| * 2^scale < 2^62.
FixedPoint encode_fixed(double x, unsigned scale);

double decode_fixed(const FixedPoint& f);

/// Checked addition; scales must match.
FixedPoint fp_add(const FixedPoint& a, const FixedPoint& b);

} // namespace csmt
