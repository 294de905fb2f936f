#include "vmp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace vmp {

bool is_symmetric(const Matrix& s, double rel_tol) {
    if (s.rows() != s.cols()) return false;
    const double scale = std::max(s.norm(), 1e-14);
    return (s - s.transpose()).norm() <= rel_tol * scale;
}

void require_symmetric(const Matrix& s, const char* where) {
    if (s.rows() == 0 || s.cols() == 0)
        throw EmptyInput(std::string(where) + ": empty matrix");
    if (s.rows() != s.cols())
        throw DimensionMismatch(std::string(where) + ": matrix is not square");
    if (!is_symmetric(s))
        throw NonSymmetric(std::string(where) + ": matrix is not symmetric");
}

Matrix sqrtm_psd(const Matrix& s) {
    require_symmetric(s, "sqrtm_psd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success)
        throw Error("sqrtm_psd: eigendecomposition failed");
    Vector lam = es.eigenvalues();
    const double lam_max = std::max(lam.maxCoeff(), 0.0);
    const double floor = -1e-10 * std::max(lam_max, 1e-14);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < floor)
            throw IndefiniteMatrix("sqrtm_psd: eigenvalue " + std::to_string(lam[i]) +
                                   " below PSD tolerance");
        lam[i] = std::sqrt(std::max(lam[i], 0.0));
    }
    Matrix r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

Matrix cholesky_lower(const Matrix& s) {
    require_symmetric(s, "cholesky_lower");
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky_lower: matrix is not positive definite");
    return llt.matrixL();
}

Vector coordinatewise_median(const std::vector<Vector>& vs) {
    if (vs.empty()) throw EmptyInput("coordinatewise_median: empty input");
    const Eigen::Index d = vs.front().size();
    for (const Vector& v : vs)
        if (v.size() != d)
            throw DimensionMismatch("coordinatewise_median: mixed vector sizes");
    Vector out(d);
    std::vector<double> col(vs.size());
    for (Eigen::Index j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < vs.size(); ++i) col[i] = vs[i][j];
        std::sort(col.begin(), col.end());
        const std::size_t n = col.size();
        out[j] = (n % 2 == 1) ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
    return out;
}

Vector solve_spd(const Matrix& s, const Vector& b) {
    require_symmetric(s, "solve_spd");
    if (s.rows() != b.size()) throw DimensionMismatch("solve_spd: size mismatch");
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
    return llt.solve(b);
}

Matrix inverse_spd(const Matrix& s) {
    require_symmetric(s, "inverse_spd");
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("inverse_spd: matrix is not positive definite");
    Matrix inv = llt.solve(Matrix::Identity(s.rows(), s.cols()));
    return 0.5 * (inv + inv.transpose());
}

double log_det_spd(const Matrix& s) {
    Matrix l = cholesky_lower(s);
    return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace vmp
