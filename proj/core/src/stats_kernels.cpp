#include "csmt/statistic_kernels.hpp"

#include "csmt/errors.hpp"

#include <cstdlib>
#include <vector>

namespace csmt {

namespace {

// exact integer count from a scaled payload entry
std::int64_t scaled_count(const FixedPoint& f) {
    if (f.raw < 0) raise(errc::out_of_range, "count payload must be nonnegative");
    const std::int64_t unit = std::int64_t(1) << f.scale;
    if (f.raw % unit != 0) raise(errc::shape_mismatch, "payload entry is not an integral count");
    return f.raw / unit;
}

} // namespace

FixedPoint max_absolute_gap(std::span<const FixedPoint> counts_a,
                            std::span<const FixedPoint> counts_b) {
    if (counts_a.size() != counts_b.size() || counts_a.empty()) {
        raise(errc::shape_mismatch, "count vectors must be nonempty and equal length");
    }
    const std::uint8_t scale = counts_a[0].scale;
    std::int64_t total_a = 0;
    std::int64_t total_b = 0;
    for (std::size_t i = 0; i < counts_a.size(); ++i) {
        if (counts_a[i].scale != scale || counts_b[i].scale != scale) {
            raise(errc::scale_mismatch, "mixed scales in count vectors");
        }
        total_a += scaled_count(counts_a[i]);
        total_b += scaled_count(counts_b[i]);
    }
    if (total_a == 0 || total_b == 0) raise(errc::division_by_zero, "empty cohort in CDF computation");

    const __int128 unit = __int128(1) << scale;
    __int128 cum_a = 0;
    __int128 cum_b = 0;
    std::int64_t zeta = 0;
    for (std::size_t i = 0; i < counts_a.size(); ++i) {
        cum_a += scaled_count(counts_a[i]);
        cum_b += scaled_count(counts_b[i]);
        const std::int64_t cdf_a = std::int64_t(cum_a * unit / total_a);
        const std::int64_t cdf_b = std::int64_t(cum_b * unit / total_b);
        const std::int64_t gap = std::llabs(cdf_a - cdf_b);
        if (gap > zeta) zeta = gap;
    }
    return FixedPoint{zeta, scale};
}

FixedPoint lrt_statistic(const FixedPoint& full_loglik, const FixedPoint& reduced_loglik) {
    if (full_loglik.scale != reduced_loglik.scale) {
        raise(errc::scale_mismatch, "log-likelihood scales differ");
    }
    std::int64_t diff;
    if (__builtin_sub_overflow(full_loglik.raw, reduced_loglik.raw, &diff) ||
        __builtin_mul_overflow(diff, std::int64_t(2), &diff)) {
        raise(errc::aggregation_overflow, "LRT statistic overflow");
    }
    return FixedPoint{diff, full_loglik.scale};
}

FixedPoint accuracy_ratio(const FixedPoint& count_total, const FixedPoint& correct_total) {
    if (count_total.scale != correct_total.scale) {
        raise(errc::scale_mismatch, "accuracy input scales differ");
    }
    const std::int64_t n = scaled_count(count_total);
    if (n == 0) raise(errc::division_by_zero, "empty test cohort");
    if (correct_total.raw < 0) raise(errc::out_of_range, "correct total must be nonnegative");
    return FixedPoint{correct_total.raw / n, count_total.scale};
}

} // namespace csmt
