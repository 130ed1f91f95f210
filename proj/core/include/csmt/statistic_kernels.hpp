#pragma once

#include "csmt/fixed_point.hpp"

#include <span>

namespace csmt {

/// KS max absolute CDF gap over two per-bin count vectors (payload raws are
/// counts scaled by 2^s). CDF entries use floor division at the working
/// scale: cdf[j] = floor(cum_count[j] * 2^s / N).
FixedPoint max_absolute_gap(std::span<const FixedPoint> counts_a,
                            std::span<const FixedPoint> counts_b);

/// zeta = -2 * (reduced - full), at the shared scale.
FixedPoint lrt_statistic(const FixedPoint& full_loglik, const FixedPoint& reduced_loglik);

/// Floor-divided accuracy: correct * 2^s / N where N is decoded from the
/// count-tree total.
FixedPoint accuracy_ratio(const FixedPoint& count_total, const FixedPoint& correct_total);

} // namespace csmt
