#pragma once

#include <vector>

#include "opstate/empirical.hpp"
#include "opstate/statespace.hpp"

namespace opstate {

/// Barycentric weights over the deterministic vertex family.
struct SimplexWeights {
  std::vector<double> lambda;
};

double entropy(const std::vector<double>& lambda);

/// Throws unless lambda is nonnegative and sums to 1 within 1e-12.
void validate_weights(const VertexSet& vertices, const SimplexWeights& weights);

/// The D map: the state realized by a mixture of deterministic vertices.
StateVector recompose(const VertexSet& vertices, const SimplexWeights& weights);

/// Certificate that no mixture reaches the target state: multipliers over the
/// coordinate rows and the normalization row whose aggregate separates the
/// state from every vertex column.
struct DualRay {
  std::vector<double> coordinate_coeffs;
  double normalization_coeff = 0.0;
};

struct DecomposeResult {
  bool feasible = false;
  SimplexWeights weights;
  double residual = 0.0;  ///< max |sum_theta lambda_theta w_theta - Z| when feasible
  DualRay certificate;    ///< when infeasible
};

/// One point of the preimage of Z under D, by linear-programming phase 1.
DecomposeResult decompose_feasible(const VertexSet& vertices, const StateVector& z);

struct PreimageDimension {
  bool feasible = false;
  int dimension = 0;
};

/// Dimension of the polytope of decompositions of Z: coordinates forced to
/// zero on the whole preimage are eliminated first, then the rank of the
/// remaining equality system decides.
PreimageDimension preimage_dimension(const VertexSet& vertices, const StateVector& z);

struct SectionOptions {
  double gradient_tol = 1e-10;
  int max_iterations = 200;
  double support_tol = 1e-9;
};

struct SectionResult {
  bool feasible = false;
  SimplexWeights weights;
  double feasibility_residual = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::vector<int> support;
  DualRay certificate;  ///< when infeasible
};

/// The maximal-entropy decomposition of Z: a continuous section of the bundle
/// D. Support detection by per-coordinate maximization, then damped Newton on
/// the entropy dual over the detected support.
SectionResult max_entropy_section(const VertexSet& vertices, const StateVector& z,
                                  const SectionOptions& options = {});

struct ProbeStep {
  double t = 0.0;
  bool feasible = false;
  double distance = 0.0;  ///< L1 distance between the sections at Z and Z + t * direction
};

std::vector<ProbeStep> section_continuity_probe(const VertexSet& vertices, const StateVector& z,
                                                const std::vector<double>& direction,
                                                const std::vector<double>& steps,
                                                const SectionOptions& options = {});

}  // namespace opstate
