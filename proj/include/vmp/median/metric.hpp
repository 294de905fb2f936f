#pragma once

#include <cstddef>
#include <vector>

#include "vmp/distributions.hpp"

namespace vmp {

/// Metric median selection: the chosen input index, the radius of the
/// smallest ball around it that covers strictly more than half of the
/// inputs, and the full pairwise distance matrix used for the choice.
struct MetricMedianReport {
    std::size_t index = 0;
    double radius = 0.0;
    Matrix distances;
};

/// Picks the input whose ceil((m+1)/2)-th smallest row entry of the pairwise
/// distance matrix (self distance included) is minimal; ties go to the
/// lowest index. Distances: Gaussian W2, kernel MMD, or mixture W2.
[[nodiscard]] MetricMedianReport metric_median(const std::vector<GaussianDist>& set);
[[nodiscard]] MetricMedianReport metric_median(const std::vector<DiscreteMeasure>& set,
                                               const RbfKernel& kernel);
[[nodiscard]] MetricMedianReport metric_median(const std::vector<GaussianMixture>& set);

}  // namespace vmp
