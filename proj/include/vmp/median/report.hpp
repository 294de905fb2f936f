#pragma once

#include <Eigen/Dense>

#include "vmp/linalg.hpp"

namespace vmp {

/// Outcome of a median aggregation: the aggregate posterior, the iterations
/// spent, the final objective, each input's distance to the result, and the
/// mixing weights the procedure assigned to its support. For the mixture
/// median, `support` lists the component tuple behind each kept weight (one
/// row per weight, one column per input).
template <typename Posterior>
struct MedianReport {
    Posterior median;
    int iterations = 0;
    double objective = 0.0;
    Vector distances;
    Vector weights;
    Eigen::MatrixXi support;
};

}  // namespace vmp
