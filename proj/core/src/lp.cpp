#include "opstate/lp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace opstate::lp {

namespace {

enum class ColKind { Structural, Slack, Surplus, Artificial };

// Dense tableau simplex. Column layout: structural vars, then one slack or
// surplus per inequality row, then artificials. Rows are normalized to
// rhs >= 0 before the tableau is formed.
struct Tableau {
  int num_vars = 0;
  int num_rows = 0;
  int num_cols = 0;
  int artificial_begin = 0;
  std::vector<double> a;   // (num_rows) x (num_cols + 1), row-major, last col = rhs
  std::vector<double> rc;  // reduced costs
  double objective = 0.0;  // current objective value (minimization)
  std::vector<int> basis;
  std::vector<int> row_flip;      // +1/-1 vs caller orientation
  std::vector<int> identity_col;  // per row: column that started as e_i
  std::vector<ColKind> col_kind;
  std::vector<int> col_owner;  // owning row for slack/surplus/artificial
  std::vector<char> banned;

  double& at(int i, int j) { return a[static_cast<size_t>(i) * (num_cols + 1) + j]; }
  double& rhs(int i) { return at(i, num_cols); }

  void pivot(int row, int col) {
    const double inv = 1.0 / at(row, col);
    for (int j = 0; j <= num_cols; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (int i = 0; i < num_rows; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (int j = 0; j <= num_cols; ++j) at(i, j) -= f * at(row, j);
      at(i, col) = 0.0;
    }
    const double f = rc[col];
    if (f != 0.0) {
      for (int j = 0; j < num_cols; ++j) rc[j] -= f * at(row, j);
      objective += f * rhs(row);
      rc[col] = 0.0;
    }
    basis[row] = col;
  }

  Status iterate(const Options& opts, long& iters) {
    for (;;) {
      if (++iters > opts.max_iterations) throw std::runtime_error("lp: iteration limit exceeded");
      int enter = -1;
      for (int j = 0; j < num_cols; ++j) {
        if (banned[j]) continue;
        if (rc[j] < -opts.pivot_tol) { enter = j; break; }  // Bland: lowest index
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < num_rows; ++i) {
        const double aij = at(i, enter);
        if (aij <= opts.pivot_tol) continue;
        const double ratio = rhs(i) / aij;
        if (ratio < best - 1e-15 || (ratio < best + 1e-15 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
  }

  void set_costs(const std::vector<double>& cost) {
    rc = cost;
    objective = 0.0;
    for (int i = 0; i < num_rows; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < num_cols; ++j) rc[j] -= cb * at(i, j);
      objective += cb * rhs(i);
    }
  }
};

Tableau build_tableau(int num_vars, const std::vector<Constraint>& constraints) {
  Tableau t;
  t.num_vars = num_vars;
  t.num_rows = static_cast<int>(constraints.size());

  int num_ineq = 0;
  for (const auto& c : constraints) {
    if (static_cast<int>(c.coeffs.size()) != num_vars)
      throw std::invalid_argument("lp: constraint arity mismatch");
    if (c.sense != Sense::Eq) ++num_ineq;
  }
  const int max_cols = num_vars + num_ineq + t.num_rows;
  t.num_cols = max_cols;
  t.a.assign(static_cast<size_t>(t.num_rows) * (max_cols + 1), 0.0);
  t.basis.assign(t.num_rows, -1);
  t.row_flip.assign(t.num_rows, 1);
  t.identity_col.assign(t.num_rows, -1);
  t.col_kind.assign(max_cols, ColKind::Structural);
  t.col_owner.assign(max_cols, -1);

  int next_slack = num_vars;
  int next_artificial = num_vars + num_ineq;
  t.artificial_begin = next_artificial;
  for (int i = 0; i < t.num_rows; ++i) {
    const auto& c = constraints[i];
    const int flip = c.rhs < 0.0 ? -1 : 1;
    t.row_flip[i] = flip;
    for (int j = 0; j < num_vars; ++j) t.at(i, j) = flip * c.coeffs[j];
    t.rhs(i) = flip * c.rhs;
    Sense sense = c.sense;
    if (flip < 0 && sense != Sense::Eq)
      sense = sense == Sense::LessEq ? Sense::GreaterEq : Sense::LessEq;
    if (sense == Sense::LessEq) {
      t.at(i, next_slack) = 1.0;
      t.col_kind[next_slack] = ColKind::Slack;
      t.col_owner[next_slack] = i;
      t.basis[i] = next_slack;
      t.identity_col[i] = next_slack;
      ++next_slack;
    } else {
      if (sense == Sense::GreaterEq) {
        t.at(i, next_slack) = -1.0;
        t.col_kind[next_slack] = ColKind::Surplus;
        t.col_owner[next_slack] = i;
        ++next_slack;
      }
      t.at(i, next_artificial) = 1.0;
      t.col_kind[next_artificial] = ColKind::Artificial;
      t.col_owner[next_artificial] = i;
      t.basis[i] = next_artificial;
      t.identity_col[i] = next_artificial;
      ++next_artificial;
    }
  }
  // shrink to the artificials actually allocated
  if (next_artificial < max_cols) {
    const int w_old = max_cols + 1, w_new = next_artificial + 1;
    for (int i = 0; i < t.num_rows; ++i) {
      for (int j = 0; j < next_artificial; ++j)
        t.a[static_cast<size_t>(i) * w_new + j] = t.a[static_cast<size_t>(i) * w_old + j];
      t.a[static_cast<size_t>(i) * w_new + next_artificial] =
          t.a[static_cast<size_t>(i) * w_old + max_cols];
    }
    t.num_cols = next_artificial;
    t.a.resize(static_cast<size_t>(t.num_rows) * w_new);
    t.col_kind.resize(next_artificial);
    t.col_owner.resize(next_artificial);
  }
  t.banned.assign(t.num_cols, 0);
  return t;
}

// Entry of column `col` in row `i` of the caller-oriented system.
double original_column_entry(const Tableau& t, const std::vector<Constraint>& constraints,
                             int col, int i) {
  switch (t.col_kind[col]) {
    case ColKind::Structural: return constraints[i].coeffs[col];
    case ColKind::Slack: return t.col_owner[col] == i ? t.row_flip[i] * 1.0 : 0.0;
    case ColKind::Surplus: return t.col_owner[col] == i ? t.row_flip[i] * -1.0 : 0.0;
    case ColKind::Artificial: return t.col_owner[col] == i ? t.row_flip[i] * 1.0 : 0.0;
  }
  return 0.0;
}

// Re-derive basic values from the original data to shed tableau drift.
void polish_solution(const Tableau& t, int num_vars, const std::vector<Constraint>& constraints,
                     std::vector<double>& x) {
  const int m = t.num_rows;
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    b(i) = constraints[i].rhs;
    for (int k = 0; k < m; ++k) B(i, k) = original_column_entry(t, constraints, t.basis[k], i);
  }
  Eigen::VectorXd xb = B.colPivHouseholderQr().solve(b);
  if ((B * xb - b).lpNorm<Eigen::Infinity>() > 1e-7) return;  // keep tableau values
  bool nonneg = true;
  for (int k = 0; k < m; ++k)
    if (xb(k) < -1e-9) { nonneg = false; break; }
  if (!nonneg) return;
  for (int k = 0; k < m; ++k)
    if (t.basis[k] < num_vars) x[t.basis[k]] = std::max(0.0, xb(k));
}

}  // namespace

Result solve(int num_vars, const std::vector<double>& objective, bool maximize,
             const std::vector<Constraint>& constraints, const Options& opts) {
  if (static_cast<int>(objective.size()) != num_vars)
    throw std::invalid_argument("lp: objective arity mismatch");

  Tableau t = build_tableau(num_vars, constraints);
  long iters = 0;

  std::vector<double> phase1(t.num_cols, 0.0);
  for (int j = t.artificial_begin; j < t.num_cols; ++j) phase1[j] = 1.0;
  t.set_costs(phase1);
  if (t.iterate(opts, iters) != Status::Optimal)
    throw std::runtime_error("lp: phase 1 cannot be unbounded");

  Result res;
  if (t.objective > opts.feas_tol) {
    res.status = Status::Infeasible;
    res.farkas.assign(t.num_rows, 0.0);
    for (int i = 0; i < t.num_rows; ++i) {
      const int u = t.identity_col[i];
      const double cu = t.col_kind[u] == ColKind::Artificial ? 1.0 : 0.0;
      res.farkas[i] = t.row_flip[i] * (cu - t.rc[u]);
    }
    return res;
  }

  // Drive leftover artificials out of the basis; an all-zero pivot row is a
  // redundant constraint and keeps its artificial pinned at zero.
  for (int i = 0; i < t.num_rows; ++i) {
    if (t.basis[i] < t.artificial_begin) continue;
    t.rhs(i) = 0.0;
    int col = -1;
    for (int j = 0; j < t.artificial_begin; ++j)
      if (std::abs(t.at(i, j)) > 1e-9) { col = j; break; }
    if (col >= 0) t.pivot(i, col);
  }
  for (int j = t.artificial_begin; j < t.num_cols; ++j) t.banned[j] = 1;

  std::vector<double> phase2(t.num_cols, 0.0);
  for (int j = 0; j < num_vars; ++j) phase2[j] = maximize ? -objective[j] : objective[j];
  t.set_costs(phase2);
  if (t.iterate(opts, iters) == Status::Unbounded) {
    res.status = Status::Unbounded;
    return res;
  }

  res.status = Status::Optimal;
  res.x.assign(num_vars, 0.0);
  for (int i = 0; i < t.num_rows; ++i)
    if (t.basis[i] < num_vars) res.x[t.basis[i]] = std::max(0.0, t.rhs(i));
  polish_solution(t, num_vars, constraints, res.x);
  double obj = 0.0;
  for (int j = 0; j < num_vars; ++j) obj += objective[j] * res.x[j];
  res.objective = obj;
  return res;
}

Result feasible_point(int num_vars, const std::vector<Constraint>& constraints,
                      const Options& opts) {
  return solve(num_vars, std::vector<double>(num_vars, 0.0), false, constraints, opts);
}

bool farkas_valid(int num_vars, const std::vector<Constraint>& constraints,
                  const std::vector<double>& farkas, double tol) {
  if (farkas.size() != constraints.size()) return false;
  double yb = 0.0;
  for (size_t i = 0; i < constraints.size(); ++i) {
    const double y = farkas[i];
    if (constraints[i].sense == Sense::LessEq && y > tol) return false;
    if (constraints[i].sense == Sense::GreaterEq && y < -tol) return false;
    yb += y * constraints[i].rhs;
  }
  if (yb <= tol) return false;
  for (int j = 0; j < num_vars; ++j) {
    double col = 0.0;
    for (size_t i = 0; i < constraints.size(); ++i) col += farkas[i] * constraints[i].coeffs[j];
    if (col > tol) return false;
  }
  return true;
}

}  // namespace opstate::lp
