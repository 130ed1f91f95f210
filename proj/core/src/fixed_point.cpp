#include "csmt/fixed_point.hpp"

#include "csmt/errors.hpp"

#include <cmath>
#include <string>

namespace csmt {

FixedPoint encode_fixed(double x, unsigned scale) {
    if (scale > unsigned(kMaxScale)) raise(errc::out_of_range, "scale must be in [0, 62]");
    if (!std::isfinite(x)) raise(errc::quantization_overflow, "non-finite input");
    const double scaled = std::ldexp(x, int(scale)); // exact: power-of-two factor
    // nearbyint under the default rounding mode is round-half-to-even
    const double rounded = std::nearbyint(scaled);
    if (!(std::fabs(rounded) < std::ldexp(1.0, 62))) {
        raise(errc::quantization_overflow,
              "value " + std::to_string(x) + " overflows at scale " + std::to_string(scale));
    }
    return FixedPoint{static_cast<std::int64_t>(rounded), static_cast<std::uint8_t>(scale)};
}

double decode_fixed(const FixedPoint& f) {
    return std::ldexp(static_cast<double>(f.raw), -int(f.scale));
}

double FixedPoint::decode() const { return decode_fixed(*this); }

FixedPoint fp_add(const FixedPoint& a, const FixedPoint& b) {
    if (a.scale != b.scale) raise(errc::scale_mismatch, "fixed-point scales differ");
    std::int64_t out;
    if (__builtin_add_overflow(a.raw, b.raw, &out)) {
        raise(errc::aggregation_overflow, "fixed-point addition overflow");
    }
    return FixedPoint{out, a.scale};
}

} // namespace csmt
