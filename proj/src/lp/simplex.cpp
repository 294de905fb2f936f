#include "vmp/lp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vmp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;

struct Tableau {
    Matrix t;                 // rows x (n + r) coefficient block, canonical basis columns
    Vector rhs;               // nonnegative right-hand side
    Vector z;                 // reduced-cost row over all columns
    double obj = 0.0;         // objective value of the current basis
    std::vector<int> basis;   // basic column per row
    int n = 0;                // structural column count
    int rows = 0;
};

/// One pivot step on (row, col): normalizes the pivot row and eliminates the
/// column from every other row and from the reduced-cost row.
void pivot(Tableau& tab, int row, int col) {
    const double piv = tab.t(row, col);
    tab.t.row(row) /= piv;
    tab.rhs[row] /= piv;
    for (int i = 0; i < tab.rows; ++i) {
        if (i == row) continue;
        const double f = tab.t(i, col);
        if (f == 0.0) continue;
        tab.t.row(i) -= f * tab.t.row(row);
        tab.rhs[i] -= f * tab.rhs[row];
        tab.t(i, col) = 0.0;
    }
    const double fz = tab.z[col];
    if (fz != 0.0) {
        tab.z -= fz * tab.t.row(row).transpose();
        tab.obj -= fz * tab.rhs[row];
        tab.z[col] = 0.0;
    }
    tab.basis[row] = col;
}

/// Bland's rule: entering column is the lowest-index negative reduced cost;
/// the leaving row breaks ratio ties by the lowest basic column index.
/// Returns Optimal when no entering column exists.
LpStatus run_simplex(Tableau& tab, int column_limit, int max_iterations, int& iterations) {
    while (true) {
        int enter = -1;
        for (int j = 0; j < column_limit; ++j) {
            if (tab.z[j] < -kReducedCostTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return LpStatus::Optimal;

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < tab.rows; ++i) {
            const double a = tab.t(i, enter);
            if (a <= kPivotTol) continue;
            const double ratio = tab.rhs[i] / a;
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 &&
                 (leave < 0 || tab.basis[i] < tab.basis[leave]))) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave < 0) return LpStatus::Unbounded;

        pivot(tab, leave, enter);
        if (++iterations >= max_iterations) return LpStatus::IterationLimit;
    }
}

}  // namespace

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

LpSolution solve_lp(const LpProblem& problem, int max_iterations) {
    const int m_all = static_cast<int>(problem.a.rows());
    const int n = static_cast<int>(problem.a.cols());
    if (m_all == 0 || n == 0) throw EmptyInput("solve_lp: empty constraint system");
    if (problem.b.size() != m_all || problem.c.size() != n)
        throw DimensionMismatch("solve_lp: inconsistent problem sizes");
    if (!problem.a.allFinite() || !problem.b.allFinite() || !problem.c.allFinite())
        throw Error("solve_lp: non-finite problem data");

    LpSolution sol;
    sol.x = Vector::Zero(n);
    sol.duals = Vector::Zero(m_all);

    // Redundancy presolve: row-echelon elimination of [A | b]. Rows that never
    // host a pivot are linear combinations of the kept ones; a nonzero
    // eliminated right-hand side certifies infeasibility.
    {
        Matrix work(m_all, n + 1);
        work.leftCols(n) = problem.a;
        work.col(n) = problem.b;
        const double b_scale = 1.0 + problem.b.cwiseAbs().maxCoeff();
        std::vector<bool> used(m_all, false);
        std::vector<int> order;
        for (int col = 0; col < n && static_cast<int>(order.size()) < m_all; ++col) {
            int piv_row = -1;
            double piv_val = 1e-9 * (1.0 + problem.a.cwiseAbs().maxCoeff());
            for (int i = 0; i < m_all; ++i) {
                if (used[i]) continue;
                if (std::abs(work(i, col)) > piv_val) {
                    piv_val = std::abs(work(i, col));
                    piv_row = i;
                }
            }
            if (piv_row < 0) continue;
            used[piv_row] = true;
            order.push_back(piv_row);
            for (int i = 0; i < m_all; ++i) {
                if (i == piv_row || std::abs(work(i, col)) == 0.0) continue;
                work.row(i) -= (work(i, col) / work(piv_row, col)) * work.row(piv_row);
            }
        }
        for (int i = 0; i < m_all; ++i) {
            if (used[i]) continue;
            if (std::abs(work(i, n)) > kFeasTol * b_scale) {
                sol.status = LpStatus::Infeasible;
                return sol;
            }
        }
        std::sort(order.begin(), order.end());
        sol.kept_rows = order;
    }

    const int m = static_cast<int>(sol.kept_rows.size());
    Matrix a(m, n);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
        a.row(i) = problem.a.row(sol.kept_rows[i]);
        b[i] = problem.b[sol.kept_rows[i]];
    }
    for (int i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            a.row(i) = -a.row(i);
            b[i] = -b[i];
        }
    }

    Tableau tab;
    tab.rows = m;
    tab.n = n;
    tab.t.resize(m, n + m);
    tab.t.leftCols(n) = a;
    tab.t.rightCols(m) = Matrix::Identity(m, m);
    tab.rhs = b;
    tab.basis.resize(m);
    for (int i = 0; i < m; ++i) tab.basis[i] = n + i;

    if (max_iterations <= 0) max_iterations = 10000 + 200 * (n + m);

    // Phase 1: minimize the sum of artificial variables.
    tab.z = Vector::Zero(n + m);
    for (int j = 0; j < n; ++j) tab.z[j] = -tab.t.col(j).sum();
    tab.obj = -tab.rhs.sum();

    LpStatus status = run_simplex(tab, n, max_iterations, sol.iterations);
    if (status == LpStatus::IterationLimit) {
        sol.status = status;
        return sol;
    }
    const double phase1 = -tab.obj;
    if (phase1 > kFeasTol * (1.0 + b.cwiseAbs().maxCoeff())) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }

    // Drive leftover artificial variables out of the basis; with the
    // redundancy presolve above every row has a structural pivot available.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j) {
            if (std::abs(tab.t(i, j)) > kPivotTol) {
                col = j;
                break;
            }
        }
        if (col >= 0) pivot(tab, i, col);
    }

    // Phase 2: original costs; artificial columns are barred from entering.
    tab.z = Vector::Zero(n + m);
    tab.obj = 0.0;
    for (int j = 0; j < n; ++j) tab.z[j] = problem.c[j];
    for (int i = 0; i < m; ++i) {
        const int bj = tab.basis[i];
        const double cb = bj < n ? problem.c[bj] : 0.0;
        if (cb == 0.0) continue;
        tab.z -= cb * tab.t.row(i).transpose();
        tab.obj -= cb * tab.rhs[i];
    }
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n + m) tab.z[tab.basis[i]] = 0.0;

    status = run_simplex(tab, n, max_iterations, sol.iterations);
    sol.status = status;
    if (status != LpStatus::Optimal) return sol;

    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) sol.x[tab.basis[i]] = tab.rhs[i];
    for (int j = 0; j < n; ++j) {
        if (sol.x[j] < -1e-12)
            throw Error("solve_lp: negative basic value beyond tolerance");
        sol.x[j] = std::max(sol.x[j], 0.0);
    }
    sol.objective = problem.c.dot(sol.x);

    // Reduced cost of artificial column i equals -y_i under the phase-2
    // costs, with a sign flip for rows negated to make b nonnegative.
    for (int i = 0; i < m; ++i) {
        const double y = -tab.z[n + i];
        const bool flipped = problem.b[sol.kept_rows[i]] < 0.0;
        sol.duals[sol.kept_rows[i]] = flipped ? -y : y;
    }
    return sol;
}

}  // namespace vmp
