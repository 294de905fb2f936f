#include "vmp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vmp/rng.hpp"

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_psd(const Matrix& cov, const char* where) {
    require_symmetric(cov, where);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw Error(std::string(where) + ": eigenvalue check failed");
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (lam_min < -1e-10 * std::max(lam_max, 1e-14))
        throw IndefiniteMatrix(std::string(where) + ": covariance is not PSD");
}

std::vector<double> normalize_weights(std::vector<double> w, const char* where) {
    if (w.empty()) throw EmptyInput(std::string(where) + ": no weights");
    double sum = 0.0;
    for (double& wi : w) {
        if (wi < -1e-9)
            throw InvalidWeights(std::string(where) + ": negative weight " + std::to_string(wi));
        wi = std::max(wi, 0.0);
        sum += wi;
    }
    if (sum <= 0.0) throw InvalidWeights(std::string(where) + ": weights sum to zero");
    for (double& wi : w) wi /= sum;
    return w;
}

/// Matrix of squared Euclidean distances between two atom lists.
Matrix squared_distances(const std::vector<Vector>& xs, const std::vector<Vector>& ys) {
    Matrix d2(xs.size(), ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j)
            d2(i, j) = (xs[i] - ys[j]).squaredNorm();
    return d2;
}

}  // namespace

double mmd_inner(const DiscreteMeasure& p, const DiscreteMeasure& q, const RbfKernel& kernel) {
    const Matrix d2 = squared_distances(p.atoms(), q.atoms());
    const double denom = 2.0 * kernel.bandwidth() * kernel.bandwidth();
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i)
        for (int j = 0; j < q.size(); ++j)
            acc += p.weights()[i] * q.weights()[j] * std::exp(-d2(i, j) / denom);
    return acc;
}

GaussianDist::GaussianDist(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0) throw EmptyInput("GaussianDist: empty mean");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
        throw DimensionMismatch("GaussianDist: covariance size does not match mean");
    check_psd(cov_, "GaussianDist");
}

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<GaussianDist> components)
    : weights_(normalize_weights(std::move(weights), "GaussianMixture")),
      components_(std::move(components)) {
    if (components_.empty()) throw EmptyInput("GaussianMixture: no components");
    if (weights_.size() != components_.size())
        throw DimensionMismatch("GaussianMixture: weight/component count mismatch");
    for (const auto& c : components_)
        if (c.dim() != components_.front().dim())
            throw DimensionMismatch("GaussianMixture: mixed component dimensions");
}

DiscreteMeasure::DiscreteMeasure(std::vector<Vector> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(normalize_weights(std::move(weights), "DiscreteMeasure")) {
    if (atoms_.empty()) throw EmptyInput("DiscreteMeasure: no atoms");
    if (weights_.size() != atoms_.size())
        throw DimensionMismatch("DiscreteMeasure: weight/atom count mismatch");
    for (const auto& a : atoms_)
        if (a.size() != atoms_.front().size())
            throw DimensionMismatch("DiscreteMeasure: mixed atom dimensions");
}

DiscreteMeasure::DiscreteMeasure(std::vector<Vector> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw EmptyInput("DiscreteMeasure: no atoms");
    for (const auto& a : atoms_)
        if (a.size() != atoms_.front().size())
            throw DimensionMismatch("DiscreteMeasure: mixed atom dimensions");
    weights_.assign(atoms_.size(), 1.0 / static_cast<double>(atoms_.size()));
}

Vector DiscreteMeasure::mean() const {
    Vector m = Vector::Zero(dim());
    for (int i = 0; i < size(); ++i) m += weights_[i] * atoms_[i];
    return m;
}

RbfKernel::RbfKernel(double bandwidth) : bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0)) throw Error("RbfKernel: bandwidth must be positive");
}

double RbfKernel::operator()(const Vector& x, const Vector& y) const {
    if (x.size() != y.size()) throw DimensionMismatch("RbfKernel: size mismatch");
    return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth_ * bandwidth_));
}

double w2_gaussian(const GaussianDist& a, const GaussianDist& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("w2_gaussian: dimension mismatch");
    const Matrix rb = sqrtm_psd(b.cov());
    const Matrix cross = sqrtm_psd(rb * a.cov() * rb);
    double w2sq = (a.mean() - b.mean()).squaredNorm() +
                  (a.cov() + b.cov() - 2.0 * cross).trace();
    return std::sqrt(std::max(w2sq, 0.0));
}

double mmd_distance(const DiscreteMeasure& p, const DiscreteMeasure& q,
                    const RbfKernel& kernel) {
    if (p.dim() != q.dim()) throw DimensionMismatch("mmd_distance: dimension mismatch");
    const double pp = mmd_inner(p, p, kernel);
    const double qq = mmd_inner(q, q, kernel);
    const double pq = mmd_inner(p, q, kernel);
    return std::sqrt(std::max(pp - 2.0 * pq + qq, 0.0));
}

double median_heuristic_bandwidth(const std::vector<DiscreteMeasure>& measures) {
    std::vector<const Vector*> pool;
    for (const auto& m : measures)
        for (const auto& a : m.atoms()) pool.push_back(&a);
    std::vector<double> dists;
    dists.reserve(pool.size() * (pool.size() - 1) / 2);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            const double d = (*pool[i] - *pool[j]).norm();
            if (d > 0.0) dists.push_back(d);
        }
    if (dists.empty()) return 1.0;
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    return dists[dists.size() / 2];
}

double logpdf_gaussian(const GaussianDist& g, const Vector& x) {
    if (x.size() != g.mean().size())
        throw DimensionMismatch("logpdf_gaussian: point dimension mismatch");
    Eigen::LLT<Matrix> llt(g.cov());
    if (llt.info() != Eigen::Success)
        throw SingularCovariance("logpdf_gaussian: covariance is singular");
    const Vector diff = x - g.mean();
    const double quad = diff.dot(llt.solve(diff));
    const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    return -0.5 * (g.dim() * kLog2Pi + logdet + quad);
}

double logpdf_mixture(const GaussianMixture& m, const Vector& x) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(m.size());
    for (int k = 0; k < m.size(); ++k) {
        terms[k] = m.weights()[k] > 0.0
                       ? std::log(m.weights()[k]) + logpdf_gaussian(m.components()[k], x)
                       : -std::numeric_limits<double>::infinity();
        best = std::max(best, terms[k]);
    }
    if (!std::isfinite(best)) return best;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - best);
    return best + std::log(acc);
}

std::vector<Vector> sample_gaussian(const GaussianDist& g, int count, std::uint64_t seed) {
    if (count < 0) throw Error("sample_gaussian: negative count");
    Eigen::LLT<Matrix> llt(g.cov());
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("sample_gaussian: covariance is not positive definite");
    const Matrix l = llt.matrixL();
    auto eng = make_engine(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Vector z(g.dim());
        for (int j = 0; j < g.dim(); ++j) z[j] = nd(eng);
        out.push_back(g.mean() + l * z);
    }
    return out;
}

std::pair<std::vector<Vector>, std::vector<int>> sample_mixture(const GaussianMixture& m,
                                                                int count, std::uint64_t seed) {
    if (count < 0) throw Error("sample_mixture: negative count");
    std::vector<Matrix> ls;
    ls.reserve(m.size());
    for (const auto& c : m.components()) {
        Eigen::LLT<Matrix> llt(c.cov());
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("sample_mixture: component covariance is not PD");
        ls.emplace_back(llt.matrixL());
    }
    auto eng = make_engine(seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Vector> xs;
    std::vector<int> ks;
    xs.reserve(count);
    ks.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double u = ud(eng);
        int k = 0;
        double cum = 0.0;
        for (; k < m.size() - 1; ++k) {
            cum += m.weights()[k];
            if (u < cum) break;
        }
        Vector z(m.dim());
        for (int j = 0; j < m.dim(); ++j) z[j] = nd(eng);
        xs.push_back(m.components()[k].mean() + ls[k] * z);
        ks.push_back(k);
    }
    return {std::move(xs), std::move(ks)};
}

}  // namespace vmp
