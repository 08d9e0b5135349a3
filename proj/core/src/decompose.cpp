#include "opstate/decompose.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opstate/lp.hpp"

namespace opstate {

namespace {

// coordinate rows plus the normalization row, lambda >= 0 implicit
std::vector<lp::Constraint> mixture_constraints(const VertexSet& vertices,
                                                const std::vector<double>& target) {
  const int n = vertices.size();
  const int d = vertices.coords().dimension();
  std::vector<lp::Constraint> rows(d + 1);
  for (int c = 0; c < d; ++c) {
    rows[c].coeffs.assign(n, 0.0);
    for (int k = 0; k < n; ++k) rows[c].coeffs[k] = vertices.vertex(k).coordinates[c];
    rows[c].sense = lp::Sense::Eq;
    rows[c].rhs = target[c];
  }
  rows[d].coeffs.assign(n, 1.0);
  rows[d].sense = lp::Sense::Eq;
  rows[d].rhs = 1.0;
  return rows;
}

double mixture_residual(const VertexSet& vertices, const std::vector<double>& lambda,
                        const std::vector<double>& target) {
  const int d = vertices.coords().dimension();
  double worst = 0.0;
  for (int c = 0; c < d; ++c) {
    double v = 0.0;
    for (int k = 0; k < vertices.size(); ++k)
      if (vertices.vertex(k).coordinates[c] == 1.0) v += lambda[k];
    worst = std::max(worst, std::abs(v - target[c]));
  }
  return worst;
}

DualRay ray_from_farkas(const std::vector<double>& farkas) {
  DualRay ray;
  ray.coordinate_coeffs.assign(farkas.begin(), farkas.end() - 1);
  ray.normalization_coeff = farkas.back();
  return ray;
}

// Coordinates of lambda that can be positive somewhere on the preimage of z.
// Returns false when the preimage is empty; `point` ends strictly positive on
// every support coordinate.
bool detect_support(const VertexSet& vertices, const StateVector& z, double tol,
                    std::vector<int>& support, std::vector<double>& point, DualRay* certificate) {
  const int n = vertices.size();
  const auto rows = mixture_constraints(vertices, z.values());
  auto first = lp::feasible_point(n, rows);
  if (first.status != lp::Status::Optimal) {
    if (certificate) *certificate = ray_from_farkas(first.farkas);
    return false;
  }
  point = first.x;
  std::vector<double> objective(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (point[k] > tol) continue;
    objective[k] = 1.0;
    auto res = lp::solve(n, objective, true, rows);
    objective[k] = 0.0;
    if (res.status != lp::Status::Optimal)
      throw std::runtime_error("support detection: bounded LP reported " +
                               std::to_string(static_cast<int>(res.status)));
    if (res.objective > tol)
      for (int j = 0; j < n; ++j) point[j] = 0.5 * (point[j] + res.x[j]);
  }
  support.clear();
  for (int k = 0; k < n; ++k)
    if (point[k] > tol) support.push_back(k);
  return true;
}

}  // namespace

double entropy(const std::vector<double>& lambda) {
  double h = 0.0;
  for (double v : lambda)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

void validate_weights(const VertexSet& vertices, const SimplexWeights& weights) {
  if (static_cast<int>(weights.lambda.size()) != vertices.size())
    throw std::invalid_argument("weights: expected one entry per vertex");
  double total = 0.0;
  for (double v : weights.lambda) {
    if (v < 0.0) throw std::invalid_argument("weights: negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("weights: sum is " + std::to_string(total));
}

StateVector recompose(const VertexSet& vertices, const SimplexWeights& weights) {
  validate_weights(vertices, weights);
  std::vector<double> values(vertices.coords().dimension(), 0.0);
  for (int k = 0; k < vertices.size(); ++k) {
    const double w = weights.lambda[k];
    if (w == 0.0) continue;
    const auto& coords = vertices.vertex(k).coordinates;
    for (int c = 0; c < static_cast<int>(values.size()); ++c)
      if (coords[c] == 1.0) values[c] += w;
  }
  return StateVector(vertices.coords_ptr(), std::move(values));
}

DecomposeResult decompose_feasible(const VertexSet& vertices, const StateVector& z) {
  if (z.dimension() != vertices.coords().dimension())
    throw std::invalid_argument("decompose: dimension mismatch");
  DecomposeResult result;
  auto res = lp::feasible_point(vertices.size(), mixture_constraints(vertices, z.values()));
  if (res.status != lp::Status::Optimal) {
    result.feasible = false;
    result.certificate = ray_from_farkas(res.farkas);
    return result;
  }
  result.feasible = true;
  result.weights.lambda = std::move(res.x);
  double total = 0.0;
  for (double& v : result.weights.lambda) {
    v = std::max(0.0, v);
    total += v;
  }
  for (double& v : result.weights.lambda) v /= total;
  result.residual = mixture_residual(vertices, result.weights.lambda, z.values());
  return result;
}

PreimageDimension preimage_dimension(const VertexSet& vertices, const StateVector& z) {
  std::vector<int> support;
  std::vector<double> point;
  if (!detect_support(vertices, z, 1e-9, support, point, nullptr)) return {false, 0};

  const int d = vertices.coords().dimension();
  Eigen::MatrixXd system(d + 1, support.size());
  for (int j = 0; j < static_cast<int>(support.size()); ++j) {
    for (int c = 0; c < d; ++c) system(c, j) = vertices.vertex(support[j]).coordinates[c];
    system(d, j) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system);
  const auto& sing = svd.singularValues();
  const double cutoff = sing.size() ? 1e-10 * sing(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing(i) > cutoff) ++rank;
  return {true, static_cast<int>(support.size()) - rank};
}

SectionResult max_entropy_section(const VertexSet& vertices, const StateVector& z,
                                  const SectionOptions& options) {
  SectionResult result;
  std::vector<double> point;
  if (!detect_support(vertices, z, options.support_tol, result.support, point,
                      &result.certificate)) {
    result.feasible = false;
    return result;
  }
  result.feasible = true;
  const int n = vertices.size();
  const int K = static_cast<int>(result.support.size());
  result.weights.lambda.assign(n, 0.0);
  if (K == 1) {
    result.weights.lambda[result.support[0]] = 1.0;
    result.feasibility_residual = mixture_residual(vertices, result.weights.lambda, z.values());
    return result;
  }

  // kept rows: coordinate rows with some variation over the support
  const int d = vertices.coords().dimension();
  std::vector<int> rows;
  for (int c = 0; c < d; ++c) {
    bool any = false, all = true;
    for (int j = 0; j < K; ++j) {
      const bool one = vertices.vertex(result.support[j]).coordinates[c] == 1.0;
      any |= one;
      all &= one;
    }
    if (any && !all) rows.push_back(c);
  }
  const int R = static_cast<int>(rows.size());
  Eigen::MatrixXd W(R, K);
  Eigen::VectorXd target(R);
  for (int i = 0; i < R; ++i) {
    target(i) = z[rows[i]];
    for (int j = 0; j < K; ++j) W(i, j) = vertices.vertex(result.support[j]).coordinates[rows[i]];
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(R);
  Eigen::VectorXd lam(K);
  auto eval = [&](const Eigen::VectorXd& yy, Eigen::VectorXd& lambda) {
    Eigen::VectorXd t = W.transpose() * yy;
    const double tmax = t.maxCoeff();
    lambda = (t.array() - tmax).exp();
    const double sum = lambda.sum();
    lambda /= sum;
    return std::log(sum) + tmax - yy.dot(target);  // dual objective, to be minimized
  };

  double g = eval(y, lam);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Eigen::VectorXd grad = W * lam - target;
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (result.gradient_norm <= options.gradient_tol) break;

    Eigen::MatrixXd H = W * lam.asDiagonal() * W.transpose();
    Eigen::VectorXd wl = W * lam;
    H.noalias() -= wl * wl.transpose();
    const double ridge = std::max(1e-14, 1e-12 * H.trace() / R);
    H.diagonal().array() += ridge;
    Eigen::VectorXd step = H.ldlt().solve(-grad);
    if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;

    double scale = 1.0;
    bool moved = false;
    for (int half = 0; half < 60; ++half, scale *= 0.5) {
      Eigen::VectorXd trial_lam;
      const double trial = eval(y + scale * step, trial_lam);
      if (trial <= g + 1e-4 * scale * grad.dot(step)) {
        y += scale * step;
        lam = trial_lam;
        g = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  result.iterations = it;

  for (int j = 0; j < K; ++j) result.weights.lambda[result.support[j]] = lam(j);
  result.feasibility_residual = mixture_residual(vertices, result.weights.lambda, z.values());
  {
    Eigen::VectorXd grad = W * lam - target;
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  }
  return result;
}

std::vector<ProbeStep> section_continuity_probe(const VertexSet& vertices, const StateVector& z,
                                                const std::vector<double>& direction,
                                                const std::vector<double>& steps,
                                                const SectionOptions& options) {
  if (static_cast<int>(direction.size()) != z.dimension())
    throw std::invalid_argument("continuity probe: direction dimension mismatch");
  auto base = max_entropy_section(vertices, z, options);
  if (!base.feasible) throw std::invalid_argument("continuity probe: base state not decomposable");

  std::vector<ProbeStep> table;
  for (double t : steps) {
    std::vector<double> shifted = z.values();
    for (int c = 0; c < z.dimension(); ++c) shifted[c] += t * direction[c];
    StateVector zt(z.coords_ptr(), std::move(shifted));
    auto probe = max_entropy_section(vertices, zt, options);
    ProbeStep step{t, probe.feasible, 0.0};
    if (probe.feasible)
      for (int k = 0; k < vertices.size(); ++k)
        step.distance += std::abs(probe.weights.lambda[k] - base.weights.lambda[k]);
    table.push_back(step);
  }
  return table;
}

}  // namespace opstate
