#include "vmp/median/weiszfeld.hpp"

#include <cmath>
#include <vector>

#include "vmp/errors.hpp"

namespace vmp {

namespace {

/// Pools the inputs into one measure with atom weights scaled by w_j.
DiscreteMeasure mix_measures(const std::vector<DiscreteMeasure>& set, const Vector& w) {
    std::vector<Vector> atoms;
    std::vector<double> weights;
    for (std::size_t j = 0; j < set.size(); ++j)
        for (int a = 0; a < set[j].size(); ++a) {
            atoms.push_back(set[j].atoms()[a]);
            weights.push_back(w[static_cast<int>(j)] * set[j].weights()[a]);
        }
    return {std::move(atoms), std::move(weights)};
}

/// RKHS distances from the mixture with weights w to every input:
/// ||Q(w) - Q_j||^2 = w'Gw - 2 (Gw)_j + G_jj.
Vector mixture_distances(const Matrix& gram, const Vector& w) {
    const Vector gw = gram * w;
    const double ww = w.dot(gw);
    Vector d(gram.rows());
    for (int j = 0; j < gram.rows(); ++j)
        d[j] = std::sqrt(std::max(ww - 2.0 * gw[j] + gram(j, j), 0.0));
    return d;
}

MedianReport<DiscreteMeasure> single_input_report(const std::vector<DiscreteMeasure>& set,
                                                  std::size_t j, int iterations,
                                                  const Vector& distances) {
    Vector w = Vector::Zero(static_cast<int>(set.size()));
    w[static_cast<int>(j)] = 1.0;
    return {set[j], iterations, distances.sum(), distances, std::move(w), {}};
}

}  // namespace

MedianReport<DiscreteMeasure> weiszfeld_median(const std::vector<DiscreteMeasure>& set,
                                               const RbfKernel& kernel, double eps,
                                               int max_iters) {
    if (set.empty()) throw EmptySet("weiszfeld_median: no measures");
    if (eps <= 0.0) throw Error("weiszfeld_median: eps must be positive");
    const int m = static_cast<int>(set.size());
    for (const auto& q : set)
        if (q.dim() != set.front().dim())
            throw DimensionMismatch("weiszfeld_median: mixed dimensions");
    if (m == 1) return single_input_report(set, 0, 0, Vector::Zero(1));

    Matrix gram(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) gram(i, j) = gram(j, i) = mmd_inner(set[i], set[j], kernel);

    Vector w = Vector::Constant(m, 1.0 / m);
    int used = 0;
    for (int t = 0; t < max_iters; ++t) {
        const Vector d = mixture_distances(gram, w);
        for (int j = 0; j < m; ++j)
            if (d[j] < 1e-12) return single_input_report(set, j, used, d);
        const Vector inv = d.cwiseInverse();
        const Vector next = inv / inv.sum();
        const Vector delta = next - w;
        const double step = std::sqrt(std::max(delta.dot(gram * delta), 0.0));
        w = next;
        ++used;
        if (step <= eps) break;
    }

    const Vector d = mixture_distances(gram, w);
    return {mix_measures(set, w), used, d.sum(), d, std::move(w), {}};
}

}  // namespace vmp
