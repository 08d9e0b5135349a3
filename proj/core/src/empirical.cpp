#include "opstate/empirical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <unordered_map>

namespace opstate {

namespace {

constexpr double kWeightTol = 1e-12;

std::uint32_t induced_performed(const MeasurementSchema& schema, std::uint64_t outcomes) {
  return schema.measurements_of(outcomes);
}

}  // namespace

FrequencyTable FrequencyTable::from_atoms(SchemaPtr schema, std::vector<Atom> atoms,
                                          std::optional<std::uint64_t> run_count) {
  FrequencyTable table;
  table.schema_ = std::move(schema);
  table.run_count_ = run_count;

  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.outcomes != b.outcomes ? a.outcomes < b.outcomes : a.performed < b.performed;
  });
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.weight < 0.0)
      throw std::invalid_argument("frequency table: negative atom weight");
    if (!table.schema_->outcome_set_consistent(atom.outcomes))
      throw std::invalid_argument("frequency table: atom selects two outcomes of one measurement");
    total += atom.weight;
    if (!table.atoms_.empty() && table.atoms_.back().outcomes == atom.outcomes &&
        table.atoms_.back().performed == atom.performed) {
      table.atoms_.back().weight += atom.weight;
    } else if (atom.weight > 0.0) {
      table.atoms_.push_back(atom);
    }
  }
  if (std::abs(total - 1.0) > kWeightTol)
    throw std::invalid_argument("frequency table: weights sum to " + std::to_string(total));

  table.single_performed_.assign(table.schema_->measurement_count(), 0.0);
  for (const auto& atom : table.atoms_)
    for (int r = 0; r < table.schema_->measurement_count(); ++r)
      if (atom.performed >> r & 1) table.single_performed_[r] += atom.weight;
  return table;
}

double FrequencyTable::outcome_probability(std::uint64_t outcome_mask) const {
  double p = 0.0;
  for (const auto& atom : atoms_)
    if ((atom.outcomes & outcome_mask) == outcome_mask) p += atom.weight;
  return p;
}

double FrequencyTable::performed_probability(std::uint32_t meas_mask) const {
  if (std::popcount(meas_mask) == 1)
    return single_performed_[std::countr_zero(meas_mask)];
  double p = 0.0;
  for (const auto& atom : atoms_)
    if ((atom.performed & meas_mask) == meas_mask) p += atom.weight;
  return p;
}

bool FrequencyTable::reduced() const {
  for (const auto& atom : atoms_)
    if (atom.performed != induced_performed(*schema_, atom.outcomes)) return false;
  return true;
}

StateVector::StateVector(CoordsPtr coords, std::vector<double> values)
    : coords_(std::move(coords)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != coords_->dimension())
    throw std::invalid_argument("state vector: expected " + std::to_string(coords_->dimension()) +
                                " coordinates, got " + std::to_string(values_.size()));
}

FrequencyTable tally(SchemaPtr schema, const std::vector<Run>& runs) {
  if (runs.empty()) throw std::invalid_argument("tally: empty run log");
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& run : runs) {
    const std::uint64_t eps = atom_of_run(*schema, run);
    ++counts[eps];
  }
  std::vector<FrequencyTable::Atom> atoms;
  atoms.reserve(counts.size());
  const double n = static_cast<double>(runs.size());
  double assigned = 0.0;
  for (const auto& [eps, c] : counts) {
    const double w = static_cast<double>(c) / n;
    atoms.push_back({eps, induced_performed(*schema, eps), w});
    assigned += w;
  }
  // counter rounding drift so the weights total exactly 1
  if (!atoms.empty()) atoms.front().weight += 1.0 - assigned;
  return FrequencyTable::from_atoms(schema, std::move(atoms), runs.size());
}

std::vector<Run> sample_runs(const FrequencyTable& table, std::uint64_t n, std::uint64_t seed) {
  if (!table.reduced())
    throw std::invalid_argument("sample_runs: table holds atoms not expressible as runs");
  const auto& schema = table.schema();
  std::vector<double> weights;
  weights.reserve(table.atoms().size());
  for (const auto& atom : table.atoms()) weights.push_back(atom.weight);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<Run> runs;
  runs.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto& atom = table.atoms()[pick(rng)];
    Run run;
    for (int r = 0; r < schema.measurement_count(); ++r)
      if (atom.performed >> r & 1) run.performed.push_back(r);
    for (int g = 0; g < schema.total_outcomes(); ++g)
      if (atom.outcomes >> g & 1) run.outcomes.push_back(schema.outcome_of_global(g));
    runs.push_back(std::move(run));
  }
  return runs;
}

E1E2Report validate_e1_e2(const FrequencyTable& table) {
  const auto& schema = table.schema();
  const int m = schema.measurement_count();
  E1E2Report report;
  report.e1_contexts.condition = "E1: performable contexts occur";
  report.outcome_needs_context.condition = "E2: outcome implies performance";
  report.exclusive_outcomes.condition = "E2: outcomes of one measurement exclude each other";
  report.context_needs_outcome.condition = "E2: performance implies an outcome";
  report.context_normalization.condition = "E2: outcome combinations exhaust each context";

  for (int r = 0; r < m; ++r) {
    if (table.performed_probability(1u << r) <= 0.0) {
      report.e1_contexts.pass = false;
      report.e1_contexts.offenders.push_back(schema.measurement(r).name);
    }
  }
  const std::uint32_t all = m == 32 ? ~0u : (1u << m) - 1;
  for (std::uint32_t a = 0; a <= all; ++a) {
    if (std::popcount(a) < 2 || schema.is_impossible(a)) continue;
    if (table.performed_probability(a) <= 0.0) {
      report.e1_contexts.pass = false;
      report.e1_contexts.offenders.push_back(schema.describe_measurement_set(a));
    }
    if (a == all) break;
  }

  for (const auto& atom : table.atoms()) {
    const std::uint32_t touched = schema.measurements_of(atom.outcomes);
    if (touched & ~atom.performed) {
      report.outcome_needs_context.pass = false;
      report.outcome_needs_context.offenders.push_back(
          schema.describe_outcome_set(atom.outcomes) + " without performing " +
          schema.describe_measurement_set(touched & ~atom.performed));
    }
    if (atom.performed & ~touched) {
      report.context_needs_outcome.pass = false;
      report.context_needs_outcome.offenders.push_back(
          "performed " + schema.describe_measurement_set(atom.performed & ~touched) +
          " with no recorded outcome");
    }
    // two outcomes of one measurement cannot be stored at all; scan anyway
    if (!schema.outcome_set_consistent(atom.outcomes)) {
      report.exclusive_outcomes.pass = false;
      report.exclusive_outcomes.offenders.push_back(schema.describe_outcome_set(atom.outcomes));
    }
  }

  // context normalization: the one-outcome-per-measurement combinations of a
  // context carry its whole frequency
  auto check_context = [&](std::uint32_t context) {
    const double pa = table.performed_probability(context);
    if (pa <= 0.0) return;
    double covered = 0.0;
    for (const auto& atom : table.atoms()) {
      if ((atom.performed & context) != context) continue;
      bool full = true;
      for (int r = 0; r < m && full; ++r)
        if (context >> r & 1)
          full = std::popcount(atom.outcomes & schema.block_mask(r)) == 1;
      if (full) covered += atom.weight;
    }
    if (std::abs(covered - pa) > kWeightTol) {
      report.context_normalization.pass = false;
      report.context_normalization.offenders.push_back(
          schema.describe_measurement_set(context) + ": covered " + std::to_string(covered) +
          " of " + std::to_string(pa));
    }
  };
  for (int r = 0; r < m; ++r) check_context(1u << r);
  for (std::uint32_t a = 0; a <= all; ++a) {
    if (std::popcount(a) >= 2 && !schema.is_impossible(a)) check_context(a);
    if (a == all) break;
  }
  return report;
}

std::vector<std::optional<double>> extract_state_partial(const FrequencyTable& table,
                                                         const CoordinateIndex& coords) {
  std::vector<std::optional<double>> values(coords.dimension());
  for (int c = 0; c < coords.dimension(); ++c) {
    if (coords.is_zero_forced(c)) {
      values[c] = 0.0;
      continue;
    }
    const std::uint32_t context = coords.measurement_set_of(c);
    const double pa = table.performed_probability(context);
    if (pa <= 0.0) continue;
    values[c] = table.outcome_probability(coords.outcome_mask_of(c)) / pa;
  }
  return values;
}

StateVector extract_state(const FrequencyTable& table, CoordsPtr coords) {
  auto partial = extract_state_partial(table, *coords);
  std::vector<double> values(partial.size());
  for (int c = 0; c < static_cast<int>(partial.size()); ++c) {
    if (!partial[c]) {
      const std::uint32_t context = coords->measurement_set_of(c);
      throw UnmeasuredContextError(table.schema().describe_measurement_set(context), context);
    }
    values[c] = *partial[c];
  }
  return StateVector(coords, std::move(values));
}

E3Report check_e3(const std::vector<FrequencyTable>& tables, const CoordinateIndex& coords,
                  std::optional<double> tolerance) {
  if (tables.size() < 2) throw std::invalid_argument("check_e3: at least two tables required");
  for (const auto& t : tables)
    if (t.schema_ptr().get() != coords.schema_ptr().get())
      throw std::invalid_argument("check_e3: tables built over different schemas");

  E3Report report;
  if (tolerance) {
    report.tolerance = *tolerance;
  } else {
    std::uint64_t n_min = 0;
    for (const auto& t : tables)
      if (t.run_count()) n_min = n_min == 0 ? *t.run_count() : std::min(n_min, *t.run_count());
    report.tolerance = n_min > 0 ? 3.0 / std::sqrt(static_cast<double>(n_min)) : 1e-9;
  }

  std::vector<std::vector<std::optional<double>>> states;
  states.reserve(tables.size());
  for (const auto& t : tables) states.push_back(extract_state_partial(t, coords));

  for (int c = 0; c < coords.dimension(); ++c) {
    double lo = 0.0, hi = 0.0;
    int estimates = 0;
    for (const auto& s : states) {
      if (!s[c]) continue;
      const double v = *s[c];
      if (estimates == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++estimates;
    }
    if (estimates >= 2) report.per_coordinate.push_back({c, hi - lo, estimates});
  }
  for (const auto& e : report.per_coordinate)
    report.max_deviation = std::max(report.max_deviation, e.deviation);
  report.pass = report.max_deviation <= report.tolerance;
  return report;
}

std::map<std::uint32_t, double> frequencies_from_context_weights(
    const MeasurementSchema& schema, const std::map<std::uint32_t, double>& context_weights) {
  double total = 0.0;
  for (const auto& [mask, w] : context_weights) {
    if (w < 0.0) throw std::invalid_argument("context weights must be nonnegative");
    if (schema.is_impossible(mask))
      throw std::invalid_argument("context weights: set '" + schema.describe_measurement_set(mask) +
                                  "' is unperformable");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("context weights must not all vanish");

  std::map<std::uint32_t, double> freqs;
  auto accumulate = [&](std::uint32_t target) {
    double p = 0.0;
    for (const auto& [mask, w] : context_weights)
      if ((mask & target) == target) p += w;
    freqs[target] = p / total;
  };
  const int m = schema.measurement_count();
  for (int r = 0; r < m; ++r) accumulate(1u << r);
  const std::uint32_t all = m == 32 ? ~0u : (1u << m) - 1;
  for (std::uint32_t a = 0; a <= all; ++a) {
    if (std::popcount(a) >= 2 && !schema.is_impossible(a)) accumulate(a);
    if (a == all) break;
  }
  return freqs;
}

FrequencyTable reconstruct_frequencies(const StateVector& z,
                                       const std::map<std::uint32_t, double>& meas_freqs,
                                       int max_total_outcomes) {
  const auto& coords = z.coords();
  const auto& schema = coords.schema();
  const int M = schema.total_outcomes();
  const int m = schema.measurement_count();
  if (M > max_total_outcomes)
    throw std::runtime_error("reconstruction: " + std::to_string(M) +
                             " outcomes exceed the cap of " + std::to_string(max_total_outcomes));

  auto freq_of = [&](std::uint32_t mask) {
    auto it = meas_freqs.find(mask);
    if (it == meas_freqs.end())
      throw std::invalid_argument("reconstruction: missing frequency for context '" +
                                  schema.describe_measurement_set(mask) + "'");
    return it->second;
  };
  for (int r = 0; r < m; ++r)
    if (freq_of(1u << r) <= 0.0)
      throw std::invalid_argument("reconstruction: p(" + schema.measurement(r).name + ") must be positive");
  for (std::uint32_t a : coords.possible_sets())
    if (freq_of(a) <= 0.0)
      throw std::invalid_argument("reconstruction: p(" + schema.describe_measurement_set(a) +
                                  ") must be positive");
  for (const auto& [mask, p] : meas_freqs) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("reconstruction: frequencies must lie in [0,1]");
    if (std::popcount(mask) >= 2 && schema.is_impossible(mask) && p != 0.0)
      throw std::invalid_argument("reconstruction: unperformable context has nonzero frequency");
    for (const auto& [sub, psub] : meas_freqs)
      if ((sub & mask) == sub && p > psub + 1e-12)
        throw std::invalid_argument("reconstruction: frequencies are not monotone");
  }
  // the state must respect its normalization identities
  for (int r = 0; r < m; ++r) {
    double s = 0.0;
    for (int i = 0; i < schema.outcome_count(r); ++i) s += z[schema.global_outcome(r, i)];
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("reconstruction: outcome frequencies of '" +
                                  schema.measurement(r).name + "' sum to " + std::to_string(s));
  }
  for (std::uint32_t a : coords.possible_sets()) {
    double s = 0.0;
    for (int k = 0; k < coords.conjunction_count(); ++k) {
      const auto& conj = coords.conjunction(k);
      if (!conj.zero_forced && conj.meas_mask == a) s += z[coords.singles_count() + k];
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("reconstruction: conjunction frequencies of '" +
                                  schema.describe_measurement_set(a) + "' sum to " + std::to_string(s));
  }

  // superset sums g(C) = sum of atom masses over atoms containing C
  const std::size_t size = 1ull << M;
  std::vector<double> g(size, 0.0);
  g[0] = 1.0;
  for (std::uint64_t mask = 1; mask < size; ++mask) {
    if (!schema.outcome_set_consistent(mask)) continue;  // zero-forced and conflicts carry no mass
    if (std::popcount(mask) == 1) {
      const int gidx = std::countr_zero(mask);
      g[mask] = z[gidx] * freq_of(1u << schema.outcome_of_global(gidx).measurement);
      continue;
    }
    const std::uint32_t a = schema.measurements_of(mask);
    if (schema.is_impossible(a)) continue;
    const int c = coords.coordinate_of(mask);
    g[mask] = z[c] * freq_of(a);
  }

  // in-place superset-sum Moebius inversion
  for (int b = 0; b < M; ++b) {
    const std::uint64_t bit = 1ull << b;
    for (std::uint64_t mask = 0; mask < size; ++mask)
      if (!(mask & bit)) g[mask] -= g[mask | bit];
  }

  std::vector<FrequencyTable::Atom> atoms;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < size; ++mask) {
    const double w = g[mask];
    if (w < -1e-9) throw NegativeMassError(mask, w);
    if (w <= 0.0) continue;
    atoms.push_back({mask, schema.measurements_of(mask), w});
    total += w;
  }
  for (auto& atom : atoms) atom.weight /= total;
  return FrequencyTable::from_atoms(z.coords().schema_ptr(), std::move(atoms));
}

}  // namespace opstate
