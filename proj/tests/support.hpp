#pragma once

#include <Eigen/Dense>
#include <random>

#include "vmp/rng.hpp"

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd random_vector(std::mt19937_64& eng, int d, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = nd(eng);
    return v;
}

/// Random symmetric positive definite matrix A A^T + eps I.
inline MatrixXd random_spd(std::mt19937_64& eng, int d, double eps = 1e-3) {
    std::normal_distribution<double> nd(0.0, 1.0);
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = nd(eng);
    MatrixXd s = a * a.transpose() + eps * MatrixXd::Identity(d, d);
    return 0.5 * (s + s.transpose());
}

/// Random PSD matrix of given rank (rank < d gives a singular matrix).
inline MatrixXd random_psd_rank(std::mt19937_64& eng, int d, int rank) {
    std::normal_distribution<double> nd(0.0, 1.0);
    MatrixXd a(d, rank);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = nd(eng);
    MatrixXd s = a * a.transpose();
    return 0.5 * (s + s.transpose());
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
inline MatrixXd random_orthogonal(std::mt19937_64& eng, int d) {
    std::normal_distribution<double> nd(0.0, 1.0);
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = nd(eng);
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ();
    return q;
}

inline double rel_err(const MatrixXd& got, const MatrixXd& want) {
    return (got - want).norm() / std::max(want.norm(), 1e-14);
}

}  // namespace testsupport
