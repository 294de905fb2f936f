#pragma once

#include <vector>

#include "vmp/distributions.hpp"
#include "vmp/median/report.hpp"

namespace vmp {

/// Geometric median of discrete measures under the RKHS (MMD) norm of the
/// given kernel, by Weiszfeld iteration over mixture weights: starting from
/// w_j = 1/m, repeat
///   w_j <- ||Q^(t) - Q_j||^{-1} / sum_i ||Q^(t) - Q_i||^{-1},
///   Q^(t+1) = sum_j w_j Q_j,
/// until ||Q^(t+1) - Q^(t)|| <= eps or `max_iters` steps. If the iterate
/// lands within 1e-12 of an input, that input is returned as the median.
/// The result measure pools the input atoms with weights w_j times the
/// original atom weights.
[[nodiscard]] MedianReport<DiscreteMeasure> weiszfeld_median(
    const std::vector<DiscreteMeasure>& set, const RbfKernel& kernel, double eps = 1e-8,
    int max_iters = 500);

}  // namespace vmp
