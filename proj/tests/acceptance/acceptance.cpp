// Acceptance suite: end-to-end statistical and behavioral checks, one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "balance_forge/cli.hpp"
#include "../oracles.hpp"

namespace bf = balance_forge;
namespace fs = std::filesystem;

namespace {

constexpr double kMeanAbsNormal = 0.7978845608028654;  // E|N(0,1)|

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double mixed_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

const bf::SimulationCell& cell_of(const bf::SimulationResult& result, double grid,
                                  bf::WeightScheme scheme, bf::Measure measure) {
  for (const auto& cell : result.cells) {
    if (cell.grid_value == grid && cell.scheme == scheme && cell.measure == measure) {
      return cell;
    }
  }
  throw std::runtime_error("missing simulation cell");
}

std::string fmt3(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// criteria 1 and 2 share one size sweep
// ---------------------------------------------------------------------------

bf::SimulationResult size_sweep_result() {
  bf::SimulationSpec spec = bf::default_spec(bf::Experiment::size_sweep);
  spec.grid = {100, 500, 1000, 5000};
  spec.replications = 2000;
  spec.seed = 1001;
  return bf::run_simulation(spec);
}

Outcome criterion1(const bf::SimulationResult& sweep) {
  Outcome out;
  for (double n : {100.0, 500.0, 1000.0, 5000.0}) {
    const auto& cell = cell_of(sweep, n, bf::WeightScheme::matching, bf::Measure::z);
    out.require(std::abs(cell.mean_abs - kMeanAbsNormal) <= 0.04,
                "mean|Z| at N=" + fmt3(n) + " is " + fmt3(cell.mean_abs));
    out.detail += (out.detail.empty() ? "mean|Z|=" : ",") + fmt3(cell.mean_abs);
  }
  return out;
}

Outcome criterion2(const bf::SimulationResult& sweep) {
  Outcome out;
  const auto& at100 = cell_of(sweep, 100, bf::WeightScheme::matching, bf::Measure::sd);
  const auto& at5000 = cell_of(sweep, 5000, bf::WeightScheme::matching, bf::Measure::sd);
  out.require(at100.mean_abs > 0.1,
              "mean|Sd| at N=100 is " + fmt3(at100.mean_abs) + " (need > 0.1)");
  out.require(at5000.mean_abs < 0.03,
              "mean|Sd| at N=5000 is " + fmt3(at5000.mean_abs) + " (need < 0.03)");
  for (double n : {100.0, 500.0, 1000.0, 5000.0}) {
    const auto& cell = cell_of(sweep, n, bf::WeightScheme::matching, bf::Measure::sd);
    const double predicted = kMeanAbsNormal * cell.null_scale;
    out.require(std::abs(cell.mean_abs - predicted) <= 0.10 * predicted,
                "folded-normal prediction off at N=" + fmt3(n) + ": observed " +
                    fmt3(cell.mean_abs) + " vs " + fmt3(predicted));
  }
  out.detail = "mean|Sd|: N=100 " + fmt3(at100.mean_abs) + ", N=5000 " +
               fmt3(at5000.mean_abs);
  return out;
}

Outcome criterion3() {
  bf::SimulationSpec spec = bf::default_spec(bf::Experiment::weight_sweep);
  spec.grid = {100};
  spec.replications = 5000;
  spec.seed = 1003;
  const bf::SimulationResult result = bf::run_simulation(spec);

  Outcome out;
  const double sd_uniform =
      cell_of(result, 100, bf::WeightScheme::uniform, bf::Measure::sd).mean_abs;
  const double sd_matching =
      cell_of(result, 100, bf::WeightScheme::matching, bf::Measure::sd).mean_abs;
  const double sd_iptw =
      cell_of(result, 100, bf::WeightScheme::iptw, bf::Measure::sd).mean_abs;
  out.require(std::abs(sd_uniform - 0.17) <= 0.02,
              "uniform mean|Sd| " + fmt3(sd_uniform) + " outside 0.17 +- 0.02");
  out.require(std::abs(sd_matching - 0.19) <= 0.02,
              "matching mean|Sd| " + fmt3(sd_matching) + " outside 0.19 +- 0.02");
  out.require(sd_iptw > 0.27, "iptw mean|Sd| " + fmt3(sd_iptw) + " (need > 0.27)");
  for (auto scheme :
       {bf::WeightScheme::uniform, bf::WeightScheme::matching, bf::WeightScheme::iptw}) {
    const double mean_z = cell_of(result, 100, scheme, bf::Measure::z).mean_abs;
    out.require(std::abs(mean_z - kMeanAbsNormal) <= 0.04,
                std::string("mean|Z| for ") + std::string(bf::to_string(scheme)) +
                    " is " + fmt3(mean_z));
  }
  out.detail = "mean|Sd| uniform=" + fmt3(sd_uniform) + " matching=" + fmt3(sd_matching) +
               " iptw=" + fmt3(sd_iptw);
  return out;
}

Outcome criterion4() {
  bf::SimulationSpec spec = bf::default_spec(bf::Experiment::ratio_sweep);
  spec.grid = {2, 5, 8, 20, 50, 80, 92, 95, 98};
  spec.replications = 2000;
  spec.seed = 1004;
  const bf::SimulationResult result = bf::run_simulation(spec);

  Outcome out;
  for (double pct : spec.grid) {
    const double mean_z =
        cell_of(result, pct, bf::WeightScheme::matching, bf::Measure::z).mean_abs;
    out.require(std::abs(mean_z - kMeanAbsNormal) <= 0.04,
                "mean|Z| at " + fmt3(pct) + "% is " + fmt3(mean_z));
    const double mean_sd =
        cell_of(result, pct, bf::WeightScheme::matching, bf::Measure::sd).mean_abs;
    if (pct >= 8.0 && pct <= 92.0) {
      out.require(mean_sd < 0.05,
                  "mean|Sd| at " + fmt3(pct) + "% is " + fmt3(mean_sd) + " (need < 0.05)");
    }
  }
  const double sd98 = cell_of(result, 98, bf::WeightScheme::matching, bf::Measure::sd).mean_abs;
  const double sd50 = cell_of(result, 50, bf::WeightScheme::matching, bf::Measure::sd).mean_abs;
  out.require(sd98 > sd50, "mean|Sd| at 98% (" + fmt3(sd98) + ") not above 50% (" +
                               fmt3(sd50) + ")");
  out.detail = "mean|Sd| 50%=" + fmt3(sd50) + " 98%=" + fmt3(sd98);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 5: uniform-weight reductions on random small instances
// ---------------------------------------------------------------------------

Outcome criterion5() {
  Outcome out;
  std::mt19937_64 gen(505);
  std::uniform_int_distribution<std::size_t> group(2, 15);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = group(gen), m = group(gen);
    const std::vector<double> wx(n, 1.0 / static_cast<double>(n));
    const std::vector<double> wy(m, 1.0 / static_cast<double>(m));

    // continuous
    std::vector<double> x(n), y(m);
    for (auto& v : x) v = value(gen);
    for (auto& v : y) v = value(gen);
    const oracle::vec lx = oracle::to_ld(x), ly = oracle::to_ld(y);
    out.require(mixed_gap(bf::z_continuous_mean(x, wx, y, wy).z,
                          static_cast<double>(oracle::unweighted_z_continuous(lx, ly))) <=
                    1e-10,
                "continuous reduction failed at trial " + std::to_string(trial));
    out.require(mixed_gap(bf::sd_weighted_continuous(x, wx, y, wy).sd,
                          static_cast<double>(oracle::unweighted_sd_continuous(lx, ly))) <=
                    1e-10,
                "sd reduction failed at trial " + std::to_string(trial));

    // binary: force both levels into both groups
    std::vector<double> bx(n, 0.0), by(m, 0.0);
    for (auto& v : bx) v = gen() % 2 ? 1.0 : 0.0;
    for (auto& v : by) v = gen() % 2 ? 1.0 : 0.0;
    bx[0] = 0.0;
    bx[n - 1] = 1.0;
    by[0] = 0.0;
    by[m - 1] = 1.0;
    if (n >= 2 && m >= 2) {
      out.require(
          mixed_gap(bf::z_binary(bx, wx, by, wy).z,
                    static_cast<double>(oracle::unweighted_z_binary(
                        oracle::to_ld(bx), oracle::to_ld(by)))) <= 1e-10,
          "binary reduction failed at trial " + std::to_string(trial));
    }

    // ordinal, no ties: a shuffled permutation split across groups
    std::vector<double> pooled(n + m);
    for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] = static_cast<double>(i + 1);
    std::shuffle(pooled.begin(), pooled.end(), gen);
    const std::vector<double> ox(pooled.begin(), pooled.begin() + static_cast<long>(n));
    const std::vector<double> oy(pooled.begin() + static_cast<long>(n), pooled.end());
    out.require(mixed_gap(bf::z_ordinal(ox, wx, oy, wy).z,
                          static_cast<double>(oracle::wilcoxon_z(oracle::to_ld(ox),
                                                                 oracle::to_ld(oy)))) <=
                    1e-10,
                "ordinal/Wilcoxon reduction failed at trial " + std::to_string(trial));

    // nominal with 3 declared categories
    std::uniform_int_distribution<int> cat(1, 3);
    std::vector<double> nx(n), ny(m);
    for (auto& v : nx) v = cat(gen);
    for (auto& v : ny) v = cat(gen);
    nx[0] = 1;
    ny[0] = 2;  // at least two occupied categories overall
    const auto weighted =
        bf::z_nominal(nx, wx, ny, wy, 3).components;
    const auto reference = oracle::unweighted_chi_square_nominal(oracle::to_ld(nx),
                                                                 oracle::to_ld(ny), 3);
    out.require(mixed_gap(weighted[0].second, static_cast<double>(reference.chi_square)) <=
                    1e-10,
                "nominal chi-square reduction failed at trial " + std::to_string(trial));
    ++checked;
  }
  out.detail = std::to_string(checked) + " instances";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 6: production path vs literal-formula oracle, nonuniform weights
// ---------------------------------------------------------------------------

Outcome criterion6() {
  Outcome out;
  std::mt19937_64 gen(606);
  std::uniform_int_distribution<std::size_t> group(3, 20);
  std::uniform_real_distribution<double> value(-6.0, 6.0);
  std::uniform_real_distribution<double> weight(0.1, 3.0);

  auto weights_for = [&](std::size_t k) {
    std::vector<double> w(k);
    double sum = 0;
    for (auto& v : w) sum += (v = weight(gen));
    for (auto& v : w) v /= sum;
    return w;
  };

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = group(gen), m = group(gen);
    const std::vector<double> wx = weights_for(n), wy = weights_for(m);
    const oracle::vec owx = oracle::to_ld(wx), owy = oracle::to_ld(wy);

    std::vector<double> x(n), y(m);
    for (auto& v : x) v = value(gen);
    for (auto& v : y) v = value(gen);
    const oracle::vec ox = oracle::to_ld(x), oy = oracle::to_ld(y);

    out.require(mixed_gap(bf::weighted_variance(x, wx),
                          static_cast<double>(oracle::wvar(ox, owx))) <= 1e-10,
                "weighted variance mismatch at trial " + std::to_string(trial));
    out.require(mixed_gap(bf::z_continuous_mean(x, wx, y, wy).z,
                          static_cast<double>(oracle::z_continuous_mean(ox, owx, oy, owy))) <=
                    1e-10,
                "continuous mean z mismatch at trial " + std::to_string(trial));
    out.require(
        mixed_gap(bf::z_continuous_variance(x, wx, y, wy).z,
                  static_cast<double>(oracle::z_continuous_variance(ox, owx, oy, owy))) <=
            1e-10,
        "variance z mismatch at trial " + std::to_string(trial));

    std::vector<double> bx(n), by(m);
    for (auto& v : bx) v = gen() % 2 ? 1.0 : 0.0;
    for (auto& v : by) v = gen() % 2 ? 1.0 : 0.0;
    bx[0] = 0.0;
    bx[n - 1] = 1.0;
    by[0] = 0.0;
    by[m - 1] = 1.0;
    out.require(mixed_gap(bf::z_binary(bx, wx, by, wy).z,
                          static_cast<double>(oracle::z_binary(
                              oracle::to_ld(bx), owx, oracle::to_ld(by), owy))) <= 1e-10,
                "binary z mismatch at trial " + std::to_string(trial));

    std::uniform_int_distribution<int> level(1, 5);
    std::vector<double> rx(n), ry(m);
    for (auto& v : rx) v = level(gen);
    for (auto& v : ry) v = level(gen);
    rx[0] = 1;
    ry[0] = 2;
    out.require(mixed_gap(bf::z_ordinal(rx, wx, ry, wy).z,
                          static_cast<double>(oracle::z_ordinal(
                              oracle::to_ld(rx), owx, oracle::to_ld(ry), owy))) <= 1e-10,
                "ordinal z mismatch at trial " + std::to_string(trial));

    std::uniform_int_distribution<int> cat(1, 4);
    std::vector<double> nx(n), ny(m);
    for (auto& v : nx) v = cat(gen);
    for (auto& v : ny) v = cat(gen);
    nx[0] = 1;
    ny[0] = 2;
    const bf::ZResult nominal = bf::z_nominal(nx, wx, ny, wy, 4);
    const auto reference = oracle::chi_square_nominal(oracle::to_ld(nx), owx,
                                                      oracle::to_ld(ny), owy, 4);
    out.require(mixed_gap(nominal.components[0].second,
                          static_cast<double>(reference.chi_square)) <= 1e-10,
                "nominal chi-square mismatch at trial " + std::to_string(trial));
    out.require(mixed_gap(nominal.z,
                          oracle::z_nominal(oracle::to_ld(nx), owx, oracle::to_ld(ny), owy,
                                            4)) <= 1e-10,
                "nominal z mismatch at trial " + std::to_string(trial));
  }
  out.detail = "100 instances per statistic";
  return out;
}

// ---------------------------------------------------------------------------
// criterion 7: null calibration per statistic under fixed nonuniform weights
// ---------------------------------------------------------------------------

struct NullWeights {
  std::vector<double> wx, wy;
};

NullWeights fixed_matching_weights(std::size_t n, std::size_t m, std::uint64_t seed) {
  bf::Xoshiro256pp rng = bf::substream(seed, 9);
  std::vector<double> ps(n + m);
  std::vector<std::uint8_t> t(n + m);
  for (std::size_t i = 0; i < n + m; ++i) {
    t[i] = i < n;
    const double mean = t[i] ? 0.34 : 0.30;
    ps[i] = std::clamp(rng.normal(mean, 0.09), 0.01, 0.99);
  }
  const bf::ScaledWeights scaled =
      bf::scale_weights(bf::compute_weights(ps, t, bf::WeightScheme::matching), t);
  return {scaled.treated(), scaled.control()};
}

struct Calibration {
  double sd = 0.0;
  double tail = 0.0;
};

Calibration calibrate(int reps, const std::function<double(bf::Xoshiro256pp&)>& draw_z) {
  double sum = 0, sum_sq = 0;
  int tail_count = 0;
  for (int rep = 0; rep < reps; ++rep) {
    bf::Xoshiro256pp rng = bf::substream(707, 11, static_cast<std::uint64_t>(rep) + 1);
    const double z = draw_z(rng);
    sum += z;
    sum_sq += z * z;
    tail_count += std::abs(z) > 1.96;
  }
  Calibration cal;
  const double mean = sum / reps;
  cal.sd = std::sqrt((sum_sq - reps * mean * mean) / (reps - 1.0));
  cal.tail = static_cast<double>(tail_count) / reps;
  return cal;
}

Outcome criterion7() {
  Outcome out;
  const int reps = 5000;

  auto check = [&](const std::string& name, const Calibration& cal) {
    out.require(cal.sd >= 0.95 && cal.sd <= 1.05,
                name + " sd(z)=" + fmt3(cal.sd) + " outside [0.95,1.05]");
    out.require(cal.tail >= 0.04 && cal.tail <= 0.06,
                name + " tail=" + fmt3(cal.tail) + " outside [0.04,0.06]");
    out.detail += (out.detail.empty() ? "" : " ") + name + ":sd=" + fmt3(cal.sd) +
                  ",tail=" + fmt3(cal.tail);
  };

  {
    const std::size_t n = 600, m = 600;
    const NullWeights w = fixed_matching_weights(n, m, 71);
    check("cont",
          calibrate(reps, [&](bf::Xoshiro256pp& rng) {
            std::vector<double> x(n), y(m);
            for (auto& v : x) v = rng.normal();
            for (auto& v : y) v = rng.normal();
            return bf::z_continuous_mean(x, w.wx, y, w.wy).z;
          }));
  }
  {
    const std::size_t n = 1200, m = 1200;
    const NullWeights w = fixed_matching_weights(n, m, 72);
    check("var",
          calibrate(reps, [&](bf::Xoshiro256pp& rng) {
            std::vector<double> x(n), y(m);
            for (auto& v : x) v = rng.normal();
            for (auto& v : y) v = rng.normal();
            return bf::z_continuous_variance(x, w.wx, y, w.wy).z;
          }));
  }
  {
    const std::size_t n = 800, m = 800;
    const NullWeights w = fixed_matching_weights(n, m, 73);
    check("bin",
          calibrate(reps, [&](bf::Xoshiro256pp& rng) {
            std::vector<double> x(n), y(m);
            for (auto& v : x) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
            for (auto& v : y) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
            return bf::z_binary(x, w.wx, y, w.wy).z;
          }));
  }
  {
    const std::size_t n = 600, m = 600;
    const NullWeights w = fixed_matching_weights(n, m, 74);
    const double probs[5] = {0.3, 0.25, 0.2, 0.15, 0.1};
    auto draw_level = [&](bf::Xoshiro256pp& rng) {
      const double u = rng.uniform01();
      double acc = 0;
      for (int k = 0; k < 4; ++k) {
        acc += probs[k];
        if (u < acc) return static_cast<double>(k + 1);
      }
      return 5.0;
    };
    check("ord",
          calibrate(reps, [&](bf::Xoshiro256pp& rng) {
            std::vector<double> x(n), y(m);
            for (auto& v : x) v = draw_level(rng);
            for (auto& v : y) v = draw_level(rng);
            return bf::z_ordinal(x, w.wx, y, w.wy).z;
          }));
  }
  {
    // nominal: probability-integral-transform values should be uniform
    const std::size_t n = 1000, m = 1000;
    const NullWeights w = fixed_matching_weights(n, m, 75);
    const double probs[3] = {0.5, 0.3, 0.2};
    auto draw_cat = [&](bf::Xoshiro256pp& rng) {
      const double u = rng.uniform01();
      if (u < probs[0]) return 1.0;
      if (u < probs[0] + probs[1]) return 2.0;
      return 3.0;
    };
    std::vector<double> cdf_values(reps);
    for (int rep = 0; rep < reps; ++rep) {
      bf::Xoshiro256pp rng = bf::substream(707, 12, static_cast<std::uint64_t>(rep) + 1);
      std::vector<double> x(n), y(m);
      for (auto& v : x) v = draw_cat(rng);
      for (auto& v : y) v = draw_cat(rng);
      const bf::ZResult r = bf::z_nominal(x, w.wx, y, w.wy, 3);
      cdf_values[static_cast<std::size_t>(rep)] = r.components[2].second;  // chi_square_cdf
    }
    std::sort(cdf_values.begin(), cdf_values.end());
    double ks = 0;
    for (int i = 0; i < reps; ++i) {
      const double u = cdf_values[static_cast<std::size_t>(i)];
      ks = std::max(ks, std::abs(u - static_cast<double>(i + 1) / reps));
      ks = std::max(ks, std::abs(u - static_cast<double>(i) / reps));
    }
    out.require(ks < 0.025, "nominal PIT KS distance " + fmt3(ks) + " (need < 0.025)");
    out.detail += " nom:ks=" + fmt3(ks);
  }
  return out;
}

// ---------------------------------------------------------------------------
// criterion 8: demonstration workflow end to end
// ---------------------------------------------------------------------------

Outcome criterion8() {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() /
                       ("bf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string prefix = (dir / "cohort").string();

  std::ostringstream sink;
  bf::cli::run_demo_data(prefix, bf::kDemoDataDefaultSeed, sink);

  auto report_for = [&](std::optional<bf::WeightScheme> scheme, const std::string& label,
                        const std::string& out_name) {
    bf::cli::BalanceOptions opts;
    opts.data_path = prefix + ".csv";
    opts.schema_path = prefix + ".schema.json";
    opts.scheme = scheme;
    opts.label = label;
    opts.out_json = (dir / out_name).string();
    std::ostringstream text;
    return bf::cli::run_balance(opts, text);
  };

  const bf::BalanceReport raw = report_for(std::nullopt, "raw", "raw.json");
  const bf::BalanceReport matching =
      report_for(bf::WeightScheme::matching, "matching", "matching.json");
  const bf::BalanceReport iptw = report_for(bf::WeightScheme::iptw, "iptw", "iptw.json");

  out.require(matching.aggregates.mean_abs_z < iptw.aggregates.mean_abs_z,
              "matching mean|z| " + fmt3(matching.aggregates.mean_abs_z) +
                  " not below iptw " + fmt3(iptw.aggregates.mean_abs_z));
  out.require(iptw.aggregates.mean_abs_z < raw.aggregates.mean_abs_z,
              "iptw mean|z| " + fmt3(iptw.aggregates.mean_abs_z) + " not below raw " +
                  fmt3(raw.aggregates.mean_abs_z));

  std::ostringstream qq;
  bf::cli::run_qq({(dir / "raw.json").string(), (dir / "matching.json").string(),
                   (dir / "iptw.json").string()},
                  qq);
  const std::string tsv = qq.str();
  out.require(tsv.find("# reference_slopes\t1.0\t0.5") != std::string::npos,
              "reference slopes missing from Q-Q TSV");
  for (const char* method : {"\nraw\t", "\nmatching\t", "\niptw\t"}) {
    out.require(tsv.find(method) != std::string::npos,
                std::string("method group missing: ") + method);
  }

  out.detail = "mean|z| raw=" + fmt3(raw.aggregates.mean_abs_z) +
               " iptw=" + fmt3(iptw.aggregates.mean_abs_z) +
               " matching=" + fmt3(matching.aggregates.mean_abs_z);
  std::error_code ec;
  fs::remove_all(dir, ec);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 9: logistic regression recovery
// ---------------------------------------------------------------------------

Outcome criterion9() {
  Outcome out;
  const std::vector<double> beta_true{-0.4, 0.8, -0.5, 0.3};
  const std::size_t n = 10000;
  int covered = 0, total = 0;
  for (int dataset = 0; dataset < 50; ++dataset) {
    bf::Xoshiro256pp rng = bf::substream(909, static_cast<std::uint64_t>(dataset) + 1);
    bf::DesignMatrix d;
    d.rows = n;
    d.cols = 4;
    d.col_names = {"(intercept)", "x1", "x2", "x3"};
    d.data.assign(n * 4, 0.0);
    std::vector<std::uint8_t> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.at(i, 0) = 1.0;
      double eta = beta_true[0];
      for (std::size_t c = 1; c < 4; ++c) {
        d.at(i, c) = rng.normal();
        eta += beta_true[c] * d.at(i, c);
      }
      t[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0;
    }
    const bf::PropensityModel model = bf::fit_logistic(d, t);
    out.require(model.converged, "fit did not converge on dataset " + std::to_string(dataset));
    for (std::size_t c = 0; c < 4; ++c) {
      ++total;
      covered +=
          std::abs(model.coefficients[c] - beta_true[c]) <= 3.0 * model.std_errors[c];
    }
  }
  const double coverage = static_cast<double>(covered) / total;
  out.require(coverage >= 0.95,
              "3-SE coverage " + fmt3(coverage) + " below 0.95 (" +
                  std::to_string(covered) + "/" + std::to_string(total) + ")");

  // intercept-only closed form
  std::vector<std::uint8_t> t(1000, 0);
  for (std::size_t i = 0; i < 270; ++i) t[i] = 1;
  bf::DesignMatrix d;
  d.rows = 1000;
  d.cols = 1;
  d.col_names = {"(intercept)"};
  d.data.assign(1000, 1.0);
  const bf::PropensityModel model = bf::fit_logistic(d, t);
  const double closed_form = std::log(0.27 / 0.73);
  out.require(std::abs(model.coefficients[0] - closed_form) <= 1e-10,
              "intercept-only fit off by " +
                  fmt3(std::abs(model.coefficients[0] - closed_form)));

  out.detail = "coverage " + std::to_string(covered) + "/" + std::to_string(total);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 10: byte-identical simulation output across thread counts
// ---------------------------------------------------------------------------

Outcome criterion10() {
  Outcome out;
  bf::SimulationSpec spec = bf::default_spec(bf::Experiment::size_sweep);
  spec.grid = {100, 200};
  spec.replications = 500;
  spec.seed = 42;

  auto serialize = [&] {
    const bf::SimulationResult result = bf::run_simulation(spec);
    std::ostringstream tsv;
    bf::simulation_to_tsv(result, tsv);
    return tsv.str() + bf::simulation_to_json(result).dump(2);
  };

  setenv("BALANCE_FORGE_THREADS", "1", 1);
  const std::string single = serialize();
  setenv("BALANCE_FORGE_THREADS", "3", 1);
  const std::string triple = serialize();
  unsetenv("BALANCE_FORGE_THREADS");
  out.require(single == triple, "outputs differ between 1 and 3 worker threads");
  out.detail = std::to_string(single.size()) + " bytes compared";
  return out;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  const auto report = [&](int index, const char* title, const Outcome& outcome,
                          double seconds) {
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << index << ": "
              << title << " (" << fmt3(seconds) << "s)";
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << "\n" << std::flush;
  };

  const auto timed = [&](int index, const char* title, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
            .count();
    report(index, title, outcome, seconds);
  };

  const auto sweep_start = Clock::now();
  bf::SimulationResult sweep;
  try {
    sweep = size_sweep_result();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] criterion 1: size sweep crashed: " << e.what() << "\n";
    std::cout << "[FAIL] criterion 2: size sweep crashed\n";
    return 2;
  }
  const double sweep_seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - sweep_start)
          .count();

  {
    const Outcome c1 = criterion1(sweep);
    report(1, "null mean of |Z| across sample sizes", c1, sweep_seconds);
    const Outcome c2 = criterion2(sweep);
    report(2, "standardized-difference size dependence", c2, 0.0);
  }
  timed(3, "weight-distribution dependence", criterion3);
  timed(4, "group-size ratio sweep", criterion4);
  timed(5, "uniform-weight reductions", criterion5);
  timed(6, "literal-formula oracle equivalence", criterion6);
  timed(7, "null calibration per statistic", criterion7);
  timed(8, "demonstration workflow ordering", criterion8);
  timed(9, "logistic regression recovery", criterion9);
  timed(10, "thread-count determinism", criterion10);

  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
