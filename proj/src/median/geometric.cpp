#include "vmp/median/geometric.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "vmp/errors.hpp"
#include "vmp/lp/simplex.hpp"

namespace vmp {

namespace {

void require_same_dim(const std::vector<GaussianDist>& set, const char* where) {
    for (const auto& g : set)
        if (g.dim() != set.front().dim())
            throw DimensionMismatch(std::string(where) + ": mixed dimensions");
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Default starting covariance: coordinatewise median of the input
/// covariance diagonals, floored away from zero to stay positive definite.
Matrix default_start(const std::vector<GaussianDist>& set) {
    std::vector<Vector> diags;
    diags.reserve(set.size());
    for (const auto& g : set) diags.push_back(g.cov().diagonal());
    Vector med = coordinatewise_median(diags);
    const double floor = std::max(1e-12, 1e-12 * med.maxCoeff());
    return med.cwiseMax(floor).asDiagonal();
}

}  // namespace

MedianReport<GaussianDist> gaussian_geometric_median(const std::vector<GaussianDist>& set,
                                                     int iters, const Matrix* s0) {
    if (set.empty()) throw EmptySet("gaussian_geometric_median: no posteriors");
    require_same_dim(set, "gaussian_geometric_median");
    if (iters < 1) throw Error("gaussian_geometric_median: iters must be >= 1");
    const int m = static_cast<int>(set.size());

    std::vector<Vector> means;
    means.reserve(set.size());
    for (const auto& g : set) means.push_back(g.mean());
    const Vector mu = coordinatewise_median(means);

    Matrix s = s0 ? *s0 : default_start(set);
    require_symmetric(s, "gaussian_geometric_median: s0");
    int used = 0;
    for (int n = 0; n < iters; ++n) {
        const Matrix root = sqrtm_psd(s);
        Matrix next = Matrix::Zero(s.rows(), s.cols());
        for (const auto& g : set) next += sqrtm_psd(symmetrized(root * g.cov() * root));
        next /= static_cast<double>(m);
        const double step = (next - s).norm();
        const double scale = s.norm();
        s = next;
        ++used;
        if (step <= 1e-10 * scale) break;
    }

    GaussianDist median(mu, symmetrized(s));
    Vector distances(m);
    for (int j = 0; j < m; ++j) distances[j] = w2_gaussian(median, set[j]);
    return {std::move(median), used, distances.sum(), std::move(distances),
            Vector::Constant(m, 1.0 / m), {}};
}

std::pair<double, GaussianDist> gmm_w2_gaussian_median_cost(
    const std::vector<GaussianDist>& tuple) {
    if (tuple.empty()) throw EmptySet("gmm_w2_gaussian_median_cost: empty tuple");
    require_same_dim(tuple, "gmm_w2_gaussian_median_cost");
    MedianReport<GaussianDist> rep = gaussian_geometric_median(tuple);
    const double cost = rep.distances.squaredNorm() / static_cast<double>(tuple.size());
    return {cost, std::move(rep.median)};
}

namespace {

/// Transport polytope constraints: one row per (input, component) pair tying
/// the coupling's marginals to the mixture weights. Redundant rows are left
/// for the solver's presolve to drop.
LpProblem marginal_lp(const std::vector<std::vector<double>>& marginals,
                      const Vector& costs, const std::vector<std::int64_t>& strides,
                      std::int64_t total) {
    int rows = 0;
    for (const auto& pi : marginals) rows += static_cast<int>(pi.size());
    LpProblem lp;
    lp.a = Matrix::Zero(rows, total);
    lp.b = Vector::Zero(rows);
    lp.c = costs;
    int row = 0;
    for (std::size_t j = 0; j < marginals.size(); ++j) {
        const auto k = static_cast<std::int64_t>(marginals[j].size());
        for (std::int64_t comp = 0; comp < k; ++comp, ++row) {
            for (std::int64_t t = 0; t < total; ++t)
                if ((t / strides[j]) % k == comp) lp.a(row, t) = 1.0;
            lp.b[row] = marginals[j][comp];
        }
    }
    return lp;
}

}  // namespace

MedianReport<GaussianMixture> gmm_median(const std::vector<GaussianMixture>& set) {
    if (set.empty()) throw EmptySet("gmm_median: no posteriors");
    const auto m = static_cast<std::int64_t>(set.size());
    for (const auto& g : set)
        if (g.dim() != set.front().dim())
            throw DimensionMismatch("gmm_median: mixed dimensions");
    if (m == 1) {
        MedianReport<GaussianMixture> rep{set.front(), 0, 0.0, Vector::Zero(1),
                                          Eigen::Map<const Vector>(
                                              set.front().weights().data(), set.front().size()),
                                          Eigen::MatrixXi(set.front().size(), 1)};
        for (int k = 0; k < set.front().size(); ++k) rep.support(k, 0) = k;
        return rep;
    }

    std::int64_t total = 1;
    for (const auto& g : set) {
        total *= g.size();
        if (total > 1000000)
            throw TensorTooLarge("gmm_median: cost tensor exceeds 10^6 entries");
    }

    std::vector<std::int64_t> strides(set.size());
    std::int64_t acc = 1;
    for (std::size_t j = 0; j < set.size(); ++j) {
        strides[j] = acc;
        acc *= set[j].size();
    }

    Vector costs(total);
    std::vector<GaussianDist> tuple_medians;
    tuple_medians.reserve(static_cast<std::size_t>(total));
    std::vector<GaussianDist> tuple;
    tuple.reserve(set.size());
    for (std::int64_t t = 0; t < total; ++t) {
        tuple.clear();
        for (std::size_t j = 0; j < set.size(); ++j)
            tuple.push_back(set[j].components()[(t / strides[j]) % set[j].size()]);
        auto [cost, med] = gmm_w2_gaussian_median_cost(tuple);
        costs[t] = cost;
        tuple_medians.push_back(std::move(med));
    }

    std::vector<std::vector<double>> marginals;
    marginals.reserve(set.size());
    for (const auto& g : set) marginals.push_back(g.weights());
    const LpSolution sol = solve_lp(marginal_lp(marginals, costs, strides, total));
    if (sol.status != LpStatus::Optimal)
        throw Error(std::string("gmm_median: transport LP ended ") + to_string(sol.status));

    std::vector<double> weights;
    std::vector<GaussianDist> components;
    std::vector<std::int64_t> kept_tuples;
    for (std::int64_t t = 0; t < total; ++t)
        if (sol.x[t] > 1e-12) {
            weights.push_back(sol.x[t]);
            components.push_back(tuple_medians[static_cast<std::size_t>(t)]);
            kept_tuples.push_back(t);
        }
    GaussianMixture median(weights, components);

    Vector distances(m);
    for (std::int64_t j = 0; j < m; ++j)
        distances[j] = mw2_gaussian_mixture(median, set[static_cast<std::size_t>(j)]);
    Eigen::MatrixXi support(static_cast<int>(kept_tuples.size()), static_cast<int>(m));
    for (std::size_t row = 0; row < kept_tuples.size(); ++row)
        for (std::size_t j = 0; j < set.size(); ++j)
            support(static_cast<int>(row), static_cast<int>(j)) =
                static_cast<int>((kept_tuples[row] / strides[j]) % set[j].size());
    Eigen::Map<const Vector> kept(weights.data(), static_cast<std::int64_t>(weights.size()));
    return {std::move(median),   sol.iterations, sol.objective,
            std::move(distances), kept,          std::move(support)};
}

double mw2_gaussian_mixture(const GaussianMixture& a, const GaussianMixture& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("mw2_gaussian_mixture: mixed dimensions");
    const std::int64_t ka = a.size();
    const std::int64_t kb = b.size();
    Vector costs(ka * kb);
    for (std::int64_t i = 0; i < ka; ++i)
        for (std::int64_t j = 0; j < kb; ++j) {
            const double d = w2_gaussian(a.components()[i], b.components()[j]);
            costs[i + ka * j] = d * d;
        }
    const std::vector<std::int64_t> strides = {1, ka};
    const LpSolution sol =
        solve_lp(marginal_lp({a.weights(), b.weights()}, costs, strides, ka * kb));
    if (sol.status != LpStatus::Optimal)
        throw Error(std::string("mw2_gaussian_mixture: transport LP ended ") +
                    to_string(sol.status));
    return std::sqrt(std::max(sol.objective, 0.0));
}

GaussianDist covariance_rescale(const GaussianDist& g, int m) {
    if (m < 1) throw Error("covariance_rescale: power must be >= 1");
    return {g.mean(), g.cov() / std::sqrt(static_cast<double>(m))};
}

GaussianMixture covariance_rescale(const GaussianMixture& g, int m) {
    std::vector<GaussianDist> components;
    components.reserve(g.components().size());
    for (const auto& c : g.components()) components.push_back(covariance_rescale(c, m));
    return {g.weights(), std::move(components)};
}

}  // namespace vmp
