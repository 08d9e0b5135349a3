#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace opstate {

/// Identifies outcome i of measurement r.
struct OutcomeId {
  int measurement = 0;
  int outcome = 0;
  friend bool operator==(const OutcomeId&, const OutcomeId&) = default;
};

struct MeasurementConfig {
  std::string name;
  std::vector<std::string> outcomes;
  std::vector<double> values;  ///< optional real labels, empty or one per outcome
};

struct SchemaConfig {
  std::vector<MeasurementConfig> measurements;
  std::vector<std::vector<std::string>> impossible;  ///< sets of measurement names
};

/// The measurement setup: measurements, their outcomes, optional real-valued
/// outcome labels, and the family of jointly unperformable measurement sets.
///
/// Measurement sets are represented as bit masks over measurement indices,
/// outcome sets as bit masks over global outcome indices (measurement-major,
/// then outcome order). The unperformable family is kept as its minimal
/// generators; membership queries treat it as upward closed.
class MeasurementSchema {
 public:
  static std::shared_ptr<const MeasurementSchema> build(const SchemaConfig& config);

  int measurement_count() const { return static_cast<int>(measurements_.size()); }
  int outcome_count(int r) const { return static_cast<int>(measurements_[r].outcomes.size()); }
  int total_outcomes() const { return total_outcomes_; }  ///< M

  const MeasurementConfig& measurement(int r) const { return measurements_[r]; }
  bool has_labels(int r) const { return !measurements_[r].values.empty(); }

  /// Index of a measurement by name; throws if unknown.
  int measurement_index(const std::string& name) const;
  /// Index of an outcome within measurement r by name; throws if unknown.
  int outcome_index(int r, const std::string& name) const;

  int outcome_offset(int r) const { return offsets_[r]; }
  int global_outcome(int r, int i) const { return offsets_[r] + i; }
  OutcomeId outcome_of_global(int g) const;

  /// True iff the measurement set contains some unperformable generator.
  bool is_impossible(std::uint32_t meas_mask) const;
  const std::vector<std::uint32_t>& impossible_generators() const { return impossible_; }
  /// The materialized upward closure of the unperformable family.
  std::vector<std::uint32_t> impossible_closure() const;

  /// Measurement set touched by a set of outcomes.
  std::uint32_t measurements_of(std::uint64_t outcome_mask) const;
  /// True iff the outcome set selects at most one outcome per measurement.
  bool outcome_set_consistent(std::uint64_t outcome_mask) const;
  /// Bit mask covering all outcomes of measurement r.
  std::uint64_t block_mask(int r) const;

  std::string describe_measurement_set(std::uint32_t meas_mask) const;
  std::string describe_outcome_set(std::uint64_t outcome_mask) const;

 private:
  std::vector<MeasurementConfig> measurements_;
  std::vector<int> offsets_;
  int total_outcomes_ = 0;
  std::vector<std::uint32_t> impossible_;  // minimal generators, at least 2 bits each
  std::unordered_map<std::string, int> name_to_index_;
};

using SchemaPtr = std::shared_ptr<const MeasurementSchema>;

/// One conjunction coordinate: a set of at least two outcome events whose
/// measurement set is performable.
struct Conjunction {
  std::uint64_t outcome_mask = 0;
  std::uint32_t meas_mask = 0;
  bool zero_forced = false;  ///< contains two outcomes of one measurement
};

/// All coordinates of the state vector: the M singles followed by every
/// conjunction coordinate, in deterministic (size, then lexicographic) order.
class CoordinateIndex {
 public:
  /// Enumerates every subset of outcomes of size >= 2 whose measurement set is
  /// performable and classifies it as free or zero-forced. Subsets whose
  /// measurement set is unperformable carry no coordinate.
  static std::shared_ptr<const CoordinateIndex> enumerate(SchemaPtr schema,
                                                          int max_total_outcomes = 22);

  const MeasurementSchema& schema() const { return *schema_; }
  SchemaPtr schema_ptr() const { return schema_; }

  int dimension() const { return schema_->total_outcomes() + static_cast<int>(conjunctions_.size()); }
  int singles_count() const { return schema_->total_outcomes(); }
  int conjunction_count() const { return static_cast<int>(conjunctions_.size()); }
  int free_count() const { return free_count_; }
  int zero_forced_count() const { return static_cast<int>(conjunctions_.size()) - free_count_; }

  const std::vector<Conjunction>& conjunctions() const { return conjunctions_; }
  const Conjunction& conjunction(int k) const { return conjunctions_[k]; }

  /// Performable measurement sets of size >= 2, in deterministic order.
  const std::vector<std::uint32_t>& possible_sets() const { return possible_sets_; }

  /// Coordinate id of an outcome set (single or conjunction); -1 if it has no
  /// coordinate. Singles occupy ids [0, M), conjunctions follow.
  int coordinate_of(std::uint64_t outcome_mask) const;
  std::uint64_t outcome_mask_of(int coordinate) const;
  std::uint32_t measurement_set_of(int coordinate) const;
  bool is_single(int coordinate) const { return coordinate < singles_count(); }
  bool is_zero_forced(int coordinate) const;
  bool is_free_conjunction(int coordinate) const;

  std::string describe(int coordinate) const;

 private:
  SchemaPtr schema_;
  std::vector<Conjunction> conjunctions_;
  std::vector<std::uint32_t> possible_sets_;
  std::unordered_map<std::uint64_t, int> coordinate_by_mask_;
  int free_count_ = 0;
};

using CoordsPtr = std::shared_ptr<const CoordinateIndex>;

/// One run of the experiment: which measurements were performed and which
/// outcome occurred for each.
struct Run {
  std::vector<int> performed;        ///< measurement indices
  std::vector<OutcomeId> outcomes;   ///< at most one per performed measurement
};

/// The reduced atom hit by a run: bit eps(i,r) = 1 iff outcome X_i^r occurred.
/// Throws if an outcome lacks its measurement, a performed measurement lacks
/// an outcome, two outcomes of one measurement co-occur, or the performed set
/// is unperformable.
std::uint64_t atom_of_run(const MeasurementSchema& schema, const Run& run);

}  // namespace opstate
