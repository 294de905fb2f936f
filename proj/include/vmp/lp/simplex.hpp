#pragma once

#include <vector>

#include "vmp/linalg.hpp"

namespace vmp {

/// Equality-form linear program: minimize c'x subject to A x = b, x >= 0.
struct LpProblem {
    Matrix a;
    Vector b;
    Vector c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    Vector x;                    ///< primal solution, clamped to zero at -1e-12
    double objective = 0.0;      ///< c'x at the returned point
    LpStatus status = LpStatus::Infeasible;
    Vector duals;                ///< one multiplier per original row (0 for dropped rows)
    std::vector<int> kept_rows;  ///< rows surviving the redundancy presolve
    int iterations = 0;          ///< total simplex pivots over both phases
};

/// Two-phase primal simplex on a dense tableau with Bland's anti-cycling
/// rule. Redundant equality rows are detected by Gaussian elimination and
/// dropped before phase 1; inconsistent dependent rows report Infeasible.
/// max_iterations <= 0 selects an automatic cap.
[[nodiscard]] LpSolution solve_lp(const LpProblem& problem, int max_iterations = 0);

[[nodiscard]] const char* to_string(LpStatus status);

}  // namespace vmp
