#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opstate/schema.hpp"

namespace opstate {

/// Relative frequencies of the atoms of the event algebra. Each atom is a
/// pair (outcomes, performed); for data obtained from well-formed runs the
/// performed set is always the one induced by the outcomes, but analytic
/// tables may deliberately decouple them to exercise the E2 validators.
class FrequencyTable {
 public:
  struct Atom {
    std::uint64_t outcomes = 0;
    std::uint32_t performed = 0;
    double weight = 0.0;
  };

  /// Validates weights (nonnegative, total 1 within 1e-12) and outcome
  /// consistency (at most one outcome per measurement), merges duplicates.
  static FrequencyTable from_atoms(SchemaPtr schema, std::vector<Atom> atoms,
                                   std::optional<std::uint64_t> run_count = std::nullopt);

  const MeasurementSchema& schema() const { return *schema_; }
  SchemaPtr schema_ptr() const { return schema_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::optional<std::uint64_t> run_count() const { return run_count_; }
  bool analytic() const { return !run_count_.has_value(); }

  /// p of a conjunction of outcome events.
  double outcome_probability(std::uint64_t outcome_mask) const;
  /// p of a conjunction of measurement-performance events.
  double performed_probability(std::uint32_t meas_mask) const;
  /// True iff every atom's performed set is the one induced by its outcomes.
  bool reduced() const;

 private:
  SchemaPtr schema_;
  std::vector<Atom> atoms_;
  std::optional<std::uint64_t> run_count_;
  std::vector<double> single_performed_;  // p(a_r)
};

/// Conditional outcome frequencies: one value per coordinate, zero-forced
/// coordinates pinned to exact 0.
class StateVector {
 public:
  StateVector(CoordsPtr coords, std::vector<double> values);

  const CoordinateIndex& coords() const { return *coords_; }
  CoordsPtr coords_ptr() const { return coords_; }
  int dimension() const { return static_cast<int>(values_.size()); }
  double operator[](int c) const { return values_[c]; }
  const std::vector<double>& values() const { return values_; }

 private:
  CoordsPtr coords_;
  std::vector<double> values_;
};

FrequencyTable tally(SchemaPtr schema, const std::vector<Run>& runs);

/// Draws runs from a reduced table; the inverse of tally up to sampling noise.
std::vector<Run> sample_runs(const FrequencyTable& table, std::uint64_t n, std::uint64_t seed);

struct E1E2Report {
  struct Check {
    std::string condition;
    bool pass = true;
    std::vector<std::string> offenders;
  };
  Check e1_contexts;           ///< every performable context occurs
  Check outcome_needs_context; ///< no outcome without its measurement
  Check exclusive_outcomes;    ///< no two outcomes of one measurement co-occur
  Check context_needs_outcome; ///< every performed measurement yields an outcome
  Check context_normalization; ///< outcome combinations exhaust each context
  bool e1_pass() const { return e1_contexts.pass; }
  bool e2_pass() const {
    return outcome_needs_context.pass && exclusive_outcomes.pass && context_needs_outcome.pass &&
           context_normalization.pass;
  }
  bool pass() const { return e1_pass() && e2_pass(); }
};

E1E2Report validate_e1_e2(const FrequencyTable& table);

/// A conditioning context required by extraction never occurred in the data.
class UnmeasuredContextError : public std::runtime_error {
 public:
  UnmeasuredContextError(std::string context, std::uint32_t meas_mask)
      : std::runtime_error("state extraction: context '" + context + "' was never performed"),
        context_name(std::move(context)),
        meas_mask(meas_mask) {}
  std::string context_name;
  std::uint32_t meas_mask;
};

StateVector extract_state(const FrequencyTable& table, CoordsPtr coords);

/// Per-coordinate conditional frequencies where the conditioning context has
/// positive frequency; nullopt elsewhere.
std::vector<std::optional<double>> extract_state_partial(const FrequencyTable& table,
                                                         const CoordinateIndex& coords);

struct E3Report {
  double tolerance = 0.0;
  double max_deviation = 0.0;
  bool pass = true;
  struct Entry {
    int coordinate = -1;
    double deviation = 0.0;
    int estimates = 0;
  };
  std::vector<Entry> per_coordinate;  ///< coordinates with at least two estimates
};

/// Compares the states extracted from several tables of one schema; the
/// default tolerance is the sampling heuristic 3/sqrt(min run count).
E3Report check_e3(const std::vector<FrequencyTable>& tables, const CoordinateIndex& coords,
                  std::optional<double> tolerance = std::nullopt);

/// The reconstructed atom mass came out negative: the state is not realizable
/// together with the given measurement frequencies.
class NegativeMassError : public std::runtime_error {
 public:
  NegativeMassError(std::uint64_t atom, double mass)
      : std::runtime_error("reconstruction: negative atom mass " + std::to_string(mass)),
        atom(atom),
        mass(mass) {}
  std::uint64_t atom;
  double mass;
};

/// Inverts the linear system tying atom weights to the state: given Z and the
/// measurement frequencies (one entry per single and per performable set,
/// keyed by measurement mask), returns the unique frequency table whose
/// extracted state is Z. Runs a fast superset-sum Moebius inversion over the
/// outcome-subset lattice, O(M 2^M).
FrequencyTable reconstruct_frequencies(const StateVector& z,
                                       const std::map<std::uint32_t, double>& meas_freqs,
                                       int max_total_outcomes = 20);

/// Measurement frequencies induced by drawing each run's performed set from
/// the given weights over performable sets (weights need not be normalized).
std::map<std::uint32_t, double> frequencies_from_context_weights(
    const MeasurementSchema& schema, const std::map<std::uint32_t, double>& context_weights);

}  // namespace opstate
