#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "opstate/empirical.hpp"
#include "opstate/schema.hpp"

namespace opstate {

enum class RowKind {
  NonNegative,               ///< f_c >= 0
  UpperBound,                ///< f_single <= 1
  Monotone,                  ///< f_conj <= f_subconj
  SingleNormalization,       ///< outcomes of one measurement sum to 1
  ConjunctionNormalization,  ///< outcome combinations of one performable set sum to 1
  ZeroForced,                ///< conflicting conjunction pinned to 0
};

struct PolytopeRow {
  RowKind kind = RowKind::NonNegative;
  bool equality = false;
  double offset = 0.0;                          ///< b in <w,f> <= b or <w,f> = b
  std::vector<std::pair<int, double>> terms;    ///< sparse normal w
  int coordinate = -1;  ///< coordinate the row is about, where applicable
  int reference = -1;   ///< monotone: sub-conjunction coordinate; normalizations: measurement / set index
};

/// The polytope of theoretically possible states, by its inequality rows.
class Polytope {
 public:
  static Polytope h_representation(CoordsPtr coords);

  const CoordinateIndex& coords() const { return *coords_; }
  CoordsPtr coords_ptr() const { return coords_; }
  int dimension() const { return coords_->dimension(); }
  const std::vector<PolytopeRow>& rows() const { return rows_; }
  double row_value(int row, const std::vector<double>& f) const;
  std::vector<double> dense_normal(int row) const;

 private:
  CoordsPtr coords_;
  std::vector<PolytopeRow> rows_;
};

struct Membership {
  struct Violation {
    int row = -1;
    double residual = 0.0;  ///< signed constraint value minus offset
  };
  bool inside = false;
  std::vector<Violation> violations;
};

Membership contains(const Polytope& polytope, const StateVector& z, double tol = 1e-9);

/// A deterministic vertex: one chosen outcome per measurement, conjunction
/// coordinates set consistently.
struct DeterministicVertex {
  std::vector<int> assignment;         ///< chosen outcome index per measurement
  std::uint64_t chosen_outcomes = 0;   ///< the same as a global outcome mask
  std::vector<double> coordinates;
};

class VertexSet {
 public:
  static std::shared_ptr<const VertexSet> deterministic(CoordsPtr coords,
                                                        std::uint64_t max_vertices = 1000000);

  const CoordinateIndex& coords() const { return *coords_; }
  CoordsPtr coords_ptr() const { return coords_; }
  int size() const { return static_cast<int>(vertices_.size()); }
  const DeterministicVertex& vertex(int k) const { return vertices_[k]; }
  const std::vector<DeterministicVertex>& vertices() const { return vertices_; }
  StateVector state(int k) const { return StateVector(coords_, vertices_[k].coordinates); }
  std::string describe(int k) const;

 private:
  CoordsPtr coords_;
  std::vector<DeterministicVertex> vertices_;
};

using VerticesPtr = std::shared_ptr<const VertexSet>;

struct VertexCertificate {
  bool is_vertex = false;
  int rank = 0;
  int dimension = 0;
  std::vector<int> active_rows;
};

/// Tests whether a point of the polytope is a vertex: the normals of its
/// active rows must span the whole ambient space. Throws if the point is not
/// in the polytope.
VertexCertificate is_vertex(const Polytope& polytope, const StateVector& z,
                            double active_tol = 1e-9, double rank_tol = 1e-8);

/// Dimension of the affine hull, with implicit equalities detected by
/// per-row minimization.
int affine_dimension(const Polytope& polytope);

}  // namespace opstate
