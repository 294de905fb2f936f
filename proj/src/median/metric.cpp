#include "vmp/median/metric.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "vmp/errors.hpp"
#include "vmp/median/geometric.hpp"

namespace vmp {

namespace {

/// Chooses argmin_j of the ceil((m+1)/2)-th smallest entry of row j; ties go
/// to the lowest index.
MetricMedianReport choose_center(Matrix distances) {
    const int m = static_cast<int>(distances.rows());
    const int order = (m + 2) / 2;
    MetricMedianReport report;
    report.radius = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
        std::vector<double> row(m);
        for (int i = 0; i < m; ++i) row[static_cast<std::size_t>(i)] = distances(j, i);
        std::nth_element(row.begin(), row.begin() + (order - 1), row.end());
        const double r = row[static_cast<std::size_t>(order - 1)];
        if (r < report.radius) {
            report.radius = r;
            report.index = static_cast<std::size_t>(j);
        }
    }
    report.distances = std::move(distances);
    return report;
}

template <typename Set, typename Dist>
MetricMedianReport pairwise_median(const Set& set, Dist&& dist, const char* where) {
    if (set.empty()) throw EmptySet(std::string(where) + ": no posteriors");
    const int m = static_cast<int>(set.size());
    Matrix d = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) d(i, j) = d(j, i) = dist(set[i], set[j]);
    return choose_center(std::move(d));
}

}  // namespace

MetricMedianReport metric_median(const std::vector<GaussianDist>& set) {
    return pairwise_median(
        set, [](const GaussianDist& a, const GaussianDist& b) { return w2_gaussian(a, b); },
        "metric_median");
}

MetricMedianReport metric_median(const std::vector<DiscreteMeasure>& set,
                                 const RbfKernel& kernel) {
    return pairwise_median(
        set,
        [&kernel](const DiscreteMeasure& a, const DiscreteMeasure& b) {
            return mmd_distance(a, b, kernel);
        },
        "metric_median");
}

MetricMedianReport metric_median(const std::vector<GaussianMixture>& set) {
    return pairwise_median(
        set,
        [](const GaussianMixture& a, const GaussianMixture& b) {
            return mw2_gaussian_mixture(a, b);
        },
        "metric_median");
}

}  // namespace vmp
