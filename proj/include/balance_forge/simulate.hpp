#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "balance_forge/balance.hpp"
#include "balance_forge/core.hpp"
#include "balance_forge/errors.hpp"
#include "balance_forge/propensity.hpp"
#include "balance_forge/rng.hpp"

namespace balance_forge {

enum class Experiment { size_sweep, weight_sweep, ratio_sweep };
enum class CovariateKind { continuous_normal, binary_bernoulli };
enum class Measure { z, sd };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::size_sweep: return "size";
    case Experiment::weight_sweep: return "weights";
    case Experiment::ratio_sweep: return "ratio";
  }
  return "?";
}

inline Experiment experiment_from_string(std::string_view s) {
  if (s == "size") return Experiment::size_sweep;
  if (s == "weights") return Experiment::weight_sweep;
  if (s == "ratio") return Experiment::ratio_sweep;
  throw DataError("unknown experiment '" + std::string(s) + "'");
}

inline std::string_view to_string(Measure m) {
  return m == Measure::z ? "z" : "sd";
}

/// Group-specific Gaussians the propensity scores are drawn from, with the
/// clamp applied to every draw.
struct PsGenerator {
  double mean_treated = 0.34;
  double mean_control = 0.30;
  double sd = 0.09;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
};

struct SimulationSpec {
  Experiment experiment = Experiment::size_sweep;
  std::vector<double> grid;  // total sample sizes, or control-group percentages
  int replications = 2000;
  std::uint64_t seed = 0;
  CovariateKind covariate_kind = CovariateKind::continuous_normal;
  std::vector<WeightScheme> schemes{WeightScheme::matching};
  PsGenerator ps;
  int total_n = 5000;  // ratio sweep only
  int min_group = 50;  // ratio sweep: grid points below this per-group size are skipped

  void validate() const {
    if (grid.empty()) throw DataError("simulation grid must be non-empty");
    if (replications < 1) throw DataError("simulation needs at least 1 replication");
    if (schemes.empty()) throw DataError("simulation needs at least one weight scheme");
    if (!(ps.clip_lo > 0.0 && ps.clip_lo < ps.clip_hi && ps.clip_hi < 1.0)) {
      throw DataError("ps clip bounds must satisfy 0 < lo < hi < 1");
    }
    if (!(ps.sd > 0.0)) throw DataError("ps standard deviation must be positive");
    for (double g : grid) {
      if (experiment == Experiment::ratio_sweep) {
        if (!(g > 0.0 && g < 100.0)) {
          throw DataError("ratio grid values are control-group percentages in (0,100)");
        }
      } else if (!(g >= 4.0)) {
        throw DataError("size grid values must be sample sizes >= 4");
      }
    }
  }
};

/// One summarized measure at one grid point under one weighting scheme.
struct SimulationCell {
  double grid_value = 0.0;
  WeightScheme scheme = WeightScheme::matching;
  Measure measure = Measure::z;
  double mean_abs = 0.0;
  double q95 = 0.0;
  double mc_se = 0.0;       // standard error of mean_abs
  double null_scale = 0.0;  // mean over replications of sqrt(sum of squared weights)
  int replications = 0;
  long redraws = 0;
};

struct SimulationResult {
  SimulationSpec spec;
  std::vector<SimulationCell> cells;
  std::vector<double> skipped_grid;  // ratio grid points with a group below min_group
};

/// Desk-scale default grids; the full grids match the published sweeps.
inline SimulationSpec default_spec(Experiment experiment, bool full_grid = false) {
  SimulationSpec spec;
  spec.experiment = experiment;
  switch (experiment) {
    case Experiment::size_sweep:
      spec.grid = full_grid ? std::vector<double>{} : std::vector<double>{100, 200, 500, 1000, 2000, 5000};
      if (full_grid) {
        for (int n = 100; n <= 10000; n += 100) spec.grid.push_back(n);
      }
      spec.replications = full_grid ? 5000 : 2000;
      spec.covariate_kind = CovariateKind::continuous_normal;
      spec.schemes = {WeightScheme::matching};
      break;
    case Experiment::weight_sweep:
      spec.grid = full_grid ? std::vector<double>{} : std::vector<double>{100, 200, 500, 1000, 2000, 5000};
      if (full_grid) {
        for (int n = 100; n <= 10000; n += 100) spec.grid.push_back(n);
      }
      spec.replications = full_grid ? 5000 : 2000;
      spec.covariate_kind = CovariateKind::continuous_normal;
      spec.schemes = {WeightScheme::uniform, WeightScheme::matching, WeightScheme::iptw};
      spec.ps.sd = 0.09 * std::sqrt(2.0);
      break;
    case Experiment::ratio_sweep:
      spec.grid = full_grid ? std::vector<double>{}
                            : std::vector<double>{1, 2, 5, 8, 10, 20, 30, 40, 50,
                                                  60, 70, 80, 90, 92, 95, 98, 99};
      if (full_grid) {
        for (int p = 1; p <= 99; ++p) spec.grid.push_back(p);
      }
      spec.replications = full_grid ? 5000 : 2000;
      spec.covariate_kind = CovariateKind::binary_bernoulli;
      spec.schemes = {WeightScheme::matching};
      spec.total_n = 5000;
      break;
  }
  return spec;
}

/// Worker count: hardware concurrency, capped by BALANCE_FORGE_THREADS.
inline int simulation_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int threads = static_cast<int>(hw);
  if (const char* env = std::getenv("BALANCE_FORGE_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && cap < threads) threads = static_cast<int>(cap);
  }
  return threads;
}

namespace detail {

// Index-sharded parallel loop. Results may only be written to per-index
// slots; the caller reduces them in a fixed order afterwards.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Quantile by linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct RepValues {
  double abs_z = 0.0;
  double abs_sd = 0.0;
  double weight_scale = 0.0;  // sqrt(sum w^2 treated + sum w^2 control)
};

// One replication at one grid point: draw the covariate, split into groups,
// attach clamped Gaussian propensity scores, then evaluate every scheme on the
// same data. Degenerate draws are redrawn from the same stream. The stream is
// addressed by the grid VALUE, so a grid point's replications do not depend on
// where it sits in the sweep.
inline long simulate_one(const SimulationSpec& spec, double grid_value, int rep,
                         std::vector<RepValues>& per_scheme) {
  Xoshiro256pp rng = substream(spec.seed, static_cast<std::uint64_t>(spec.experiment) + 1,
                               std::bit_cast<std::uint64_t>(grid_value),
                               static_cast<std::uint64_t>(rep) + 1);
  const bool ratio = spec.experiment == Experiment::ratio_sweep;
  const int n_units = ratio ? spec.total_n : static_cast<int>(grid_value);
  const int n_control_fixed =
      ratio ? static_cast<int>(std::lround(grid_value / 100.0 * n_units)) : 0;

  std::vector<double> values(static_cast<std::size_t>(n_units));
  std::vector<std::uint8_t> treatment(static_cast<std::size_t>(n_units));
  std::vector<double> ps(static_cast<std::size_t>(n_units));

  long redraws = 0;
  for (;;) {
    int n_treated = 0;
    double sum_x = 0.0, sum_y = 0.0;
    for (int i = 0; i < n_units; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if (spec.covariate_kind == CovariateKind::continuous_normal) {
        values[idx] = rng.normal();
      } else {
        values[idx] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      }
      const bool treated = ratio ? (i >= n_control_fixed) : rng.bernoulli(0.5);
      treatment[idx] = treated ? 1 : 0;
      n_treated += treated;
      (treated ? sum_x : sum_y) += values[idx];
    }
    const int n_ctl = n_units - n_treated;
    bool degenerate = n_treated < 2 || n_ctl < 2;
    if (!degenerate && spec.covariate_kind == CovariateKind::binary_bernoulli) {
      // both groups need both outcome levels for a prevalence in (0,1)
      degenerate = sum_x == 0.0 || sum_x == n_treated || sum_y == 0.0 || sum_y == n_ctl;
    }
    if (degenerate) {
      ++redraws;
      continue;
    }

    for (int i = 0; i < n_units; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double mean = treatment[idx] ? spec.ps.mean_treated : spec.ps.mean_control;
      ps[idx] = std::clamp(rng.normal(mean, spec.ps.sd), spec.ps.clip_lo, spec.ps.clip_hi);
    }

    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
      const std::vector<double> raw = compute_weights(ps, treatment, spec.schemes[s]);
      const ScaledWeights scaled = scale_weights(raw, treatment);
      const GroupSplit g = split_by_group(values, treatment);
      const std::vector<double> wx = scaled.treated();
      const std::vector<double> wy = scaled.control();
      double z, sd;
      if (spec.covariate_kind == CovariateKind::continuous_normal) {
        z = z_continuous_mean(g.x, wx, g.y, wy).z;
        sd = sd_weighted_continuous(g.x, wx, g.y, wy).sd;
      } else {
        z = z_binary(g.x, wx, g.y, wy).z;
        sd = sd_weighted_binary(g.x, wx, g.y, wy).sd;
      }
      per_scheme[s].abs_z = std::abs(z);
      per_scheme[s].abs_sd = std::abs(sd);
      per_scheme[s].weight_scale = std::sqrt(sum_sq_weights(wx) + sum_sq_weights(wy));
    }
    return redraws;
  }
}

}  // namespace detail

/// Run the sweep described by the spec. Identical (spec, seed) pairs produce
/// identical results for any worker count: replications draw from independent
/// substreams and land in preassigned slots, and the reduction order is fixed.
inline SimulationResult run_simulation(const SimulationSpec& spec) {
  spec.validate();
  SimulationResult result;
  result.spec = spec;
  const int threads = simulation_threads();
  const int reps = spec.replications;

  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    if (spec.experiment == Experiment::ratio_sweep) {
      const int n_ctl = static_cast<int>(std::lround(spec.grid[gi] / 100.0 * spec.total_n));
      if (std::min(n_ctl, spec.total_n - n_ctl) < spec.min_group) {
        result.skipped_grid.push_back(spec.grid[gi]);
        continue;
      }
    }

    const std::size_t n_schemes = spec.schemes.size();
    std::vector<std::vector<detail::RepValues>> slots(
        static_cast<std::size_t>(reps), std::vector<detail::RepValues>(n_schemes));
    std::vector<long> redraws(static_cast<std::size_t>(reps), 0);

    detail::parallel_for(reps, threads, [&](int rep) {
      redraws[static_cast<std::size_t>(rep)] =
          detail::simulate_one(spec, spec.grid[gi], rep, slots[static_cast<std::size_t>(rep)]);
    });

    long total_redraws = 0;
    for (long r : redraws) total_redraws += r;

    for (std::size_t s = 0; s < n_schemes; ++s) {
      for (const Measure measure : {Measure::z, Measure::sd}) {
        CompensatedSum sum, sum_sq, scale_sum;
        std::vector<double> values(static_cast<std::size_t>(reps));
        for (int rep = 0; rep < reps; ++rep) {
          const auto& v = slots[static_cast<std::size_t>(rep)][s];
          const double a = measure == Measure::z ? v.abs_z : v.abs_sd;
          values[static_cast<std::size_t>(rep)] = a;
          sum.add(a);
          sum_sq.add(a * a);
          scale_sum.add(v.weight_scale);
        }
        std::sort(values.begin(), values.end());
        SimulationCell cell;
        cell.grid_value = spec.grid[gi];
        cell.scheme = spec.schemes[s];
        cell.measure = measure;
        const double r = reps;
        cell.mean_abs = sum.value() / r;
        cell.q95 = detail::quantile_sorted(values, 0.95);
        const double var = reps > 1
            ? std::max(0.0, (sum_sq.value() - r * cell.mean_abs * cell.mean_abs) / (r - 1.0))
            : 0.0;
        cell.mc_se = std::sqrt(var / r);
        cell.null_scale = scale_sum.value() / r;
        cell.replications = reps;
        cell.redraws = total_redraws;
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

/// Sweep over total sample sizes with a continuous covariate.
inline SimulationResult run_size_sweep(const SimulationSpec& spec) {
  if (spec.experiment != Experiment::size_sweep ||
      spec.covariate_kind != CovariateKind::continuous_normal) {
    throw DataError("run_size_sweep: spec must describe a continuous size sweep");
  }
  return run_simulation(spec);
}

/// Sweep over total sample sizes comparing weighting schemes.
inline SimulationResult run_weight_sweep(const SimulationSpec& spec) {
  if (spec.experiment != Experiment::weight_sweep ||
      spec.covariate_kind != CovariateKind::continuous_normal) {
    throw DataError("run_weight_sweep: spec must describe a continuous weight sweep");
  }
  return run_simulation(spec);
}

/// Sweep over the control-group share at fixed total size with a binary
/// covariate.
inline SimulationResult run_ratio_sweep(const SimulationSpec& spec) {
  if (spec.experiment != Experiment::ratio_sweep ||
      spec.covariate_kind != CovariateKind::binary_bernoulli) {
    throw DataError("run_ratio_sweep: spec must describe a binary ratio sweep");
  }
  return run_simulation(spec);
}

}  // namespace balance_forge
