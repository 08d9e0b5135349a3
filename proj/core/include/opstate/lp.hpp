#pragma once

#include <vector>

namespace opstate::lp {

enum class Sense { LessEq, Eq, GreaterEq };

struct Constraint {
  std::vector<double> coeffs;
  Sense sense = Sense::Eq;
  double rhs = 0.0;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Options {
  double pivot_tol = 1e-11;
  double feas_tol = 1e-9;   ///< phase-1 objective above this means infeasible
  long max_iterations = 200000;
};

/// Outcome of a solve. On Infeasible, `farkas` holds one multiplier per
/// constraint row (in caller orientation) certifying the contradiction:
/// y_i <= 0 on LessEq rows, y_i >= 0 on GreaterEq rows, y free on Eq rows,
/// with (y^T A)_j <= 0 for every column j and y^T b > 0.
struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> farkas;
};

/// Dense two-phase simplex over nonnegative variables with Bland's rule.
/// Optimizes objective . x subject to the constraint rows and x >= 0.
Result solve(int num_vars, const std::vector<double>& objective, bool maximize,
             const std::vector<Constraint>& constraints, const Options& opts = {});

/// Phase-1 only convenience: any feasible point of {A x ~ b, x >= 0}.
Result feasible_point(int num_vars, const std::vector<Constraint>& constraints,
                      const Options& opts = {});

/// True iff `farkas` certifies infeasibility of the system within `tol`.
bool farkas_valid(int num_vars, const std::vector<Constraint>& constraints,
                  const std::vector<double>& farkas, double tol = 1e-7);

}  // namespace opstate::lp
