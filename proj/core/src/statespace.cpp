#include "opstate/statespace.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <stdexcept>

#include "opstate/lp.hpp"

namespace opstate {

Polytope Polytope::h_representation(CoordsPtr coords) {
  Polytope poly;
  poly.coords_ = coords;
  const int M = coords->singles_count();
  const int d = coords->dimension();
  auto& rows = poly.rows_;

  for (int c = 0; c < M; ++c)
    rows.push_back({RowKind::NonNegative, false, 0.0, {{c, -1.0}}, c, -1});
  for (int c = 0; c < M; ++c)
    rows.push_back({RowKind::UpperBound, false, 1.0, {{c, 1.0}}, c, -1});
  for (int c = M; c < d; ++c)
    rows.push_back({RowKind::NonNegative, false, 0.0, {{c, -1.0}}, c, -1});

  // one monotonicity row per immediate sub-conjunction
  for (int k = 0; k < coords->conjunction_count(); ++k) {
    const int c = M + k;
    const std::uint64_t mask = coords->conjunction(k).outcome_mask;
    for (std::uint64_t rest = mask; rest;) {
      const int g = std::countr_zero(rest);
      rest &= rest - 1;
      const int sub = coords->coordinate_of(mask & ~(1ull << g));
      rows.push_back({RowKind::Monotone, false, 0.0, {{c, 1.0}, {sub, -1.0}}, c, sub});
    }
  }

  const auto& schema = coords->schema();
  for (int r = 0; r < schema.measurement_count(); ++r) {
    PolytopeRow row{RowKind::SingleNormalization, true, 1.0, {}, -1, r};
    for (int i = 0; i < schema.outcome_count(r); ++i)
      row.terms.push_back({schema.global_outcome(r, i), 1.0});
    rows.push_back(std::move(row));
  }
  for (int s = 0; s < static_cast<int>(coords->possible_sets().size()); ++s) {
    const std::uint32_t set = coords->possible_sets()[s];
    PolytopeRow row{RowKind::ConjunctionNormalization, true, 1.0, {}, -1, s};
    for (int k = 0; k < coords->conjunction_count(); ++k) {
      const auto& conj = coords->conjunction(k);
      if (!conj.zero_forced && conj.meas_mask == set) row.terms.push_back({M + k, 1.0});
    }
    rows.push_back(std::move(row));
  }
  for (int k = 0; k < coords->conjunction_count(); ++k)
    if (coords->conjunction(k).zero_forced)
      rows.push_back({RowKind::ZeroForced, true, 0.0, {{M + k, 1.0}}, M + k, -1});
  return poly;
}

double Polytope::row_value(int row, const std::vector<double>& f) const {
  double v = 0.0;
  for (const auto& [c, w] : rows_[row].terms) v += w * f[c];
  return v;
}

std::vector<double> Polytope::dense_normal(int row) const {
  std::vector<double> w(dimension(), 0.0);
  for (const auto& [c, coef] : rows_[row].terms) w[c] = coef;
  return w;
}

Membership contains(const Polytope& polytope, const StateVector& z, double tol) {
  if (z.dimension() != polytope.dimension())
    throw std::invalid_argument("contains: dimension mismatch");
  Membership result;
  for (int i = 0; i < static_cast<int>(polytope.rows().size()); ++i) {
    const auto& row = polytope.rows()[i];
    const double residual = polytope.row_value(i, z.values()) - row.offset;
    const bool violated = row.equality ? std::abs(residual) > tol : residual > tol;
    if (violated) result.violations.push_back({i, residual});
  }
  result.inside = result.violations.empty();
  return result;
}

std::shared_ptr<const VertexSet> VertexSet::deterministic(CoordsPtr coords,
                                                          std::uint64_t max_vertices) {
  const auto& schema = coords->schema();
  const int m = schema.measurement_count();

  std::uint64_t count = 1;
  for (int r = 0; r < m; ++r) {
    count *= static_cast<std::uint64_t>(schema.outcome_count(r));
    if (count > max_vertices)
      throw std::runtime_error("vertex enumeration: more than " + std::to_string(max_vertices) +
                               " assignments");
  }

  auto set = std::make_shared<VertexSet>();
  set->coords_ = coords;
  std::vector<int> assignment(m, 0);
  for (std::uint64_t v = 0; v < count; ++v) {
    DeterministicVertex vertex;
    vertex.assignment = assignment;
    for (int r = 0; r < m; ++r)
      vertex.chosen_outcomes |= 1ull << schema.global_outcome(r, assignment[r]);
    vertex.coordinates.assign(coords->dimension(), 0.0);
    for (int r = 0; r < m; ++r) vertex.coordinates[schema.global_outcome(r, assignment[r])] = 1.0;
    for (int k = 0; k < coords->conjunction_count(); ++k) {
      const std::uint64_t mask = coords->conjunction(k).outcome_mask;
      if ((mask & vertex.chosen_outcomes) == mask) vertex.coordinates[coords->singles_count() + k] = 1.0;
    }
    set->vertices_.push_back(std::move(vertex));
    // odometer, last measurement fastest
    for (int r = m - 1; r >= 0; --r) {
      if (++assignment[r] < schema.outcome_count(r)) break;
      assignment[r] = 0;
    }
  }
  return set;
}

std::string VertexSet::describe(int k) const {
  return coords_->schema().describe_outcome_set(vertices_[k].chosen_outcomes);
}

VertexCertificate is_vertex(const Polytope& polytope, const StateVector& z, double active_tol,
                            double rank_tol) {
  const auto inside = contains(polytope, z, active_tol);
  if (!inside.inside)
    throw std::invalid_argument("is_vertex: point is not in the polytope");

  VertexCertificate cert;
  cert.dimension = polytope.dimension();
  for (int i = 0; i < static_cast<int>(polytope.rows().size()); ++i) {
    const auto& row = polytope.rows()[i];
    const double residual = polytope.row_value(i, z.values()) - row.offset;
    if (row.equality || std::abs(residual) <= active_tol) cert.active_rows.push_back(i);
  }

  Eigen::MatrixXd normals(cert.active_rows.size(), cert.dimension);
  normals.setZero();
  for (int i = 0; i < static_cast<int>(cert.active_rows.size()); ++i)
    for (const auto& [c, w] : polytope.rows()[cert.active_rows[i]].terms) normals(i, c) = w;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normals);
  const auto& sing = svd.singularValues();
  const double cutoff = sing.size() ? rank_tol * sing(0) : 0.0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing(i) > cutoff) ++cert.rank;
  cert.is_vertex = cert.rank == cert.dimension;
  return cert;
}

int affine_dimension(const Polytope& polytope) {
  const int d = polytope.dimension();
  std::vector<lp::Constraint> constraints;
  for (const auto& row : polytope.rows()) {
    lp::Constraint c;
    c.coeffs.assign(d, 0.0);
    for (const auto& [idx, w] : row.terms) c.coeffs[idx] = w;
    c.sense = row.equality ? lp::Sense::Eq : lp::Sense::LessEq;
    c.rhs = row.offset;
    constraints.push_back(std::move(c));
  }

  std::vector<std::vector<double>> tight_normals;
  for (int i = 0; i < static_cast<int>(polytope.rows().size()); ++i) {
    if (polytope.rows()[i].equality) {
      tight_normals.push_back(constraints[i].coeffs);
      continue;
    }
    // implicit equality iff the row cannot go slack anywhere in the polytope
    auto res = lp::solve(d, constraints[i].coeffs, false, constraints);
    if (res.status != lp::Status::Optimal)
      throw std::runtime_error("affine_dimension: inner LP failed");
    if (res.objective >= polytope.rows()[i].offset - 1e-9)
      tight_normals.push_back(constraints[i].coeffs);
  }
  if (tight_normals.empty()) return d;

  Eigen::MatrixXd normals(tight_normals.size(), d);
  for (int i = 0; i < static_cast<int>(tight_normals.size()); ++i)
    for (int j = 0; j < d; ++j) normals(i, j) = tight_normals[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normals);
  const auto& sing = svd.singularValues();
  const double cutoff = sing.size() ? 1e-8 * sing(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing(i) > cutoff) ++rank;
  return d - rank;
}

}  // namespace opstate
