#include "opstate/schema.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

namespace opstate {

namespace {

bool name_is_clean(const std::string& name) {
  if (name.empty()) return false;
  return name.find_first_of(",;=\n\r") == std::string::npos;
}

}  // namespace

std::shared_ptr<const MeasurementSchema> MeasurementSchema::build(const SchemaConfig& config) {
  if (config.measurements.empty()) throw std::invalid_argument("schema: at least one measurement required");
  if (config.measurements.size() > 32) throw std::invalid_argument("schema: at most 32 measurements supported");

  auto schema = std::make_shared<MeasurementSchema>();
  schema->measurements_ = config.measurements;

  int offset = 0;
  for (int r = 0; r < static_cast<int>(schema->measurements_.size()); ++r) {
    const auto& meas = schema->measurements_[r];
    if (!name_is_clean(meas.name))
      throw std::invalid_argument("schema: invalid measurement name '" + meas.name + "'");
    if (meas.outcomes.empty())
      throw std::invalid_argument("schema: measurement '" + meas.name + "' needs at least one outcome");
    if (!schema->name_to_index_.emplace(meas.name, r).second)
      throw std::invalid_argument("schema: duplicate measurement name '" + meas.name + "'");

    std::set<std::string> seen;
    for (const auto& out : meas.outcomes) {
      if (!name_is_clean(out))
        throw std::invalid_argument("schema: invalid outcome name '" + out + "' in '" + meas.name + "'");
      if (!seen.insert(out).second)
        throw std::invalid_argument("schema: duplicate outcome '" + out + "' in '" + meas.name + "'");
    }
    if (!meas.values.empty()) {
      if (meas.values.size() != meas.outcomes.size())
        throw std::invalid_argument("schema: '" + meas.name + "' needs one label per outcome");
      std::set<double> labels(meas.values.begin(), meas.values.end());
      if (labels.size() != meas.values.size())
        throw std::invalid_argument("schema: labels within '" + meas.name + "' must be pairwise distinct");
    }
    schema->offsets_.push_back(offset);
    offset += static_cast<int>(meas.outcomes.size());
  }
  if (offset > 64) throw std::invalid_argument("schema: at most 64 outcomes in total supported");
  schema->total_outcomes_ = offset;

  std::set<std::uint32_t> raw;
  for (const auto& names : config.impossible) {
    std::uint32_t mask = 0;
    for (const auto& n : names) mask |= 1u << schema->measurement_index(n);
    if (std::popcount(mask) < 2)
      throw std::invalid_argument("schema: unperformable set '" + schema->describe_measurement_set(mask) +
                                  "' must involve at least two measurements");
    raw.insert(mask);
  }
  // keep the minimal antichain; supersets are implied
  for (std::uint32_t m : raw) {
    bool dominated = false;
    for (std::uint32_t g : raw)
      if (g != m && (g & m) == g) { dominated = true; break; }
    if (!dominated) schema->impossible_.push_back(m);
  }
  std::sort(schema->impossible_.begin(), schema->impossible_.end(),
            [](std::uint32_t a, std::uint32_t b) {
              int pa = std::popcount(a), pb = std::popcount(b);
              return pa != pb ? pa < pb : a < b;
            });
  return schema;
}

int MeasurementSchema::measurement_index(const std::string& name) const {
  auto it = name_to_index_.find(name);
  if (it == name_to_index_.end()) throw std::invalid_argument("schema: unknown measurement '" + name + "'");
  return it->second;
}

int MeasurementSchema::outcome_index(int r, const std::string& name) const {
  const auto& outs = measurements_[r].outcomes;
  auto it = std::find(outs.begin(), outs.end(), name);
  if (it == outs.end())
    throw std::invalid_argument("schema: unknown outcome '" + name + "' of '" + measurements_[r].name + "'");
  return static_cast<int>(it - outs.begin());
}

OutcomeId MeasurementSchema::outcome_of_global(int g) const {
  for (int r = measurement_count() - 1; r >= 0; --r)
    if (g >= offsets_[r]) return {r, g - offsets_[r]};
  throw std::out_of_range("schema: bad global outcome index");
}

bool MeasurementSchema::is_impossible(std::uint32_t meas_mask) const {
  for (std::uint32_t g : impossible_)
    if ((g & meas_mask) == g) return true;
  return false;
}

std::vector<std::uint32_t> MeasurementSchema::impossible_closure() const {
  if (measurement_count() > 24)
    throw std::runtime_error("schema: closure enumeration limited to 24 measurements");
  std::vector<std::uint32_t> closed;
  const std::uint32_t all = measurement_count() == 32 ? ~0u : (1u << measurement_count()) - 1;
  for (std::uint32_t mask = 0; mask <= all; ++mask)
    if (is_impossible(mask)) closed.push_back(mask);
  return closed;
}

std::uint32_t MeasurementSchema::measurements_of(std::uint64_t outcome_mask) const {
  std::uint32_t meas = 0;
  for (int r = 0; r < measurement_count(); ++r)
    if (outcome_mask & block_mask(r)) meas |= 1u << r;
  return meas;
}

bool MeasurementSchema::outcome_set_consistent(std::uint64_t outcome_mask) const {
  for (int r = 0; r < measurement_count(); ++r)
    if (std::popcount(outcome_mask & block_mask(r)) > 1) return false;
  return true;
}

std::uint64_t MeasurementSchema::block_mask(int r) const {
  const int n = outcome_count(r);
  const std::uint64_t ones = n == 64 ? ~0ull : (1ull << n) - 1;
  return ones << offsets_[r];
}

std::string MeasurementSchema::describe_measurement_set(std::uint32_t meas_mask) const {
  std::string out;
  for (int r = 0; r < measurement_count(); ++r) {
    if (!(meas_mask >> r & 1)) continue;
    if (!out.empty()) out += ';';
    out += measurements_[r].name;
  }
  return out;
}

std::string MeasurementSchema::describe_outcome_set(std::uint64_t outcome_mask) const {
  std::string out;
  for (int g = 0; g < total_outcomes_; ++g) {
    if (!(outcome_mask >> g & 1)) continue;
    auto [r, i] = outcome_of_global(g);
    if (!out.empty()) out += ';';
    out += measurements_[r].name + "=" + measurements_[r].outcomes[i];
  }
  return out;
}

std::shared_ptr<const CoordinateIndex> CoordinateIndex::enumerate(SchemaPtr schema,
                                                                  int max_total_outcomes) {
  const int M = schema->total_outcomes();
  if (M > max_total_outcomes)
    throw std::runtime_error("coordinates: total outcome count " + std::to_string(M) +
                             " exceeds enumeration cap " + std::to_string(max_total_outcomes));

  auto coords = std::make_shared<CoordinateIndex>();
  coords->schema_ = schema;

  const std::uint32_t meas_all = (schema->measurement_count() == 32)
                                     ? ~0u
                                     : (1u << schema->measurement_count()) - 1;
  for (std::uint32_t a = 0; a <= meas_all; ++a)
    if (std::popcount(a) >= 2 && !schema->is_impossible(a)) coords->possible_sets_.push_back(a);
  std::sort(coords->possible_sets_.begin(), coords->possible_sets_.end(),
            [](std::uint32_t a, std::uint32_t b) {
              int pa = std::popcount(a), pb = std::popcount(b);
              return pa != pb ? pa < pb : a < b;
            });

  const std::uint64_t top = (M == 64) ? ~0ull : (1ull << M) - 1;
  for (std::uint64_t mask = 0; mask <= top; ++mask) {
    if (std::popcount(mask) < 2) continue;
    const std::uint32_t meas = schema->measurements_of(mask);
    if (schema->is_impossible(meas)) continue;  // no coordinate for unperformable support
    coords->conjunctions_.push_back({mask, meas, !schema->outcome_set_consistent(mask)});
    if (mask == top) break;
  }
  // size, then lexicographic on ascending outcome indices
  std::sort(coords->conjunctions_.begin(), coords->conjunctions_.end(),
            [M](const Conjunction& a, const Conjunction& b) {
              int pa = std::popcount(a.outcome_mask), pb = std::popcount(b.outcome_mask);
              if (pa != pb) return pa < pb;
              for (int g = 0; g < M; ++g) {
                bool ba = a.outcome_mask >> g & 1, bb = b.outcome_mask >> g & 1;
                if (ba != bb) return ba;
              }
              return false;
            });

  for (int k = 0; k < static_cast<int>(coords->conjunctions_.size()); ++k) {
    coords->coordinate_by_mask_.emplace(coords->conjunctions_[k].outcome_mask, M + k);
    if (!coords->conjunctions_[k].zero_forced) ++coords->free_count_;
  }
  for (int g = 0; g < M; ++g) coords->coordinate_by_mask_.emplace(1ull << g, g);
  return coords;
}

int CoordinateIndex::coordinate_of(std::uint64_t outcome_mask) const {
  auto it = coordinate_by_mask_.find(outcome_mask);
  return it == coordinate_by_mask_.end() ? -1 : it->second;
}

std::uint64_t CoordinateIndex::outcome_mask_of(int coordinate) const {
  if (coordinate < singles_count()) return 1ull << coordinate;
  return conjunctions_[coordinate - singles_count()].outcome_mask;
}

std::uint32_t CoordinateIndex::measurement_set_of(int coordinate) const {
  if (coordinate < singles_count())
    return 1u << schema_->outcome_of_global(coordinate).measurement;
  return conjunctions_[coordinate - singles_count()].meas_mask;
}

bool CoordinateIndex::is_zero_forced(int coordinate) const {
  return coordinate >= singles_count() && conjunctions_[coordinate - singles_count()].zero_forced;
}

bool CoordinateIndex::is_free_conjunction(int coordinate) const {
  return coordinate >= singles_count() && !conjunctions_[coordinate - singles_count()].zero_forced;
}

std::string CoordinateIndex::describe(int coordinate) const {
  return schema_->describe_outcome_set(outcome_mask_of(coordinate));
}

std::uint64_t atom_of_run(const MeasurementSchema& schema, const Run& run) {
  std::uint32_t performed = 0;
  for (int r : run.performed) {
    if (r < 0 || r >= schema.measurement_count()) throw std::invalid_argument("run: bad measurement index");
    performed |= 1u << r;
  }
  if (schema.is_impossible(performed))
    throw std::invalid_argument("run: performed set '" + schema.describe_measurement_set(performed) +
                                "' is declared unperformable");
  std::uint64_t eps = 0;
  std::uint32_t covered = 0;
  for (const auto& [r, i] : run.outcomes) {
    if (r < 0 || r >= schema.measurement_count() || i < 0 || i >= schema.outcome_count(r))
      throw std::invalid_argument("run: bad outcome id");
    if (!(performed >> r & 1))
      throw std::invalid_argument("run: outcome of '" + schema.measurement(r).name +
                                  "' recorded without performing it");
    if (covered >> r & 1)
      throw std::invalid_argument("run: two outcomes of '" + schema.measurement(r).name + "' in one run");
    covered |= 1u << r;
    eps |= 1ull << schema.global_outcome(r, i);
  }
  if (covered != performed) {
    const std::uint32_t missing = performed & ~covered;
    throw std::invalid_argument("run: performed '" + schema.describe_measurement_set(missing) +
                                "' has no recorded outcome");
  }
  return eps;
}

}  // namespace opstate
