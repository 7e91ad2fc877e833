#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "balance_forge/core.hpp"
#include "balance_forge/distributions.hpp"
#include "balance_forge/errors.hpp"
#include "balance_forge/numeric.hpp"

namespace balance_forge {

enum class ZKind { continuous_mean, continuous_variance, binary, ordinal, nominal };

inline std::string_view to_string(ZKind k) {
  switch (k) {
    case ZKind::continuous_mean: return "continuous_mean";
    case ZKind::continuous_variance: return "continuous_variance";
    case ZKind::binary: return "binary";
    case ZKind::ordinal: return "ordinal";
    case ZKind::nominal: return "nominal";
  }
  return "?";
}

inline ZKind zkind_from_string(std::string_view s) {
  if (s == "continuous_mean") return ZKind::continuous_mean;
  if (s == "continuous_variance") return ZKind::continuous_variance;
  if (s == "binary") return ZKind::binary;
  if (s == "ordinal") return ZKind::ordinal;
  if (s == "nominal") return ZKind::nominal;
  throw DataError("unknown z kind '" + std::string(s) + "'");
}

/// Ordered (name, value) intermediates kept for audit output.
using Components = std::vector<std::pair<std::string, double>>;

struct ZResult {
  std::string covariate;
  ZKind kind = ZKind::continuous_mean;
  double z = std::numeric_limits<double>::quiet_NaN();
  Components components;
  std::vector<std::string> warnings;
};

struct SdResult {
  std::string covariate;
  double sd = std::numeric_limits<double>::quiet_NaN();
  bool pooled = true;
};

namespace detail {

inline void check_group_sizes(std::span<const double> x, std::span<const double> wx,
                              std::span<const double> y, std::span<const double> wy,
                              const char* where) {
  if (x.size() != wx.size() || y.size() != wy.size()) {
    throw DataError(std::string(where) + ": value and weight lengths differ");
  }
  if (x.empty() || y.empty()) {
    throw DataError(std::string(where) + ": both groups must be non-empty");
  }
}

// Midranks of the pooled sample: ties share the average of the ranks they
// occupy, so the ranks always sum to N(N+1)/2.
inline std::vector<double> midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

inline std::size_t count_distinct(std::span<const double> xs) {
  std::set<double> s(xs.begin(), xs.end());
  return s.size();
}

inline bool is_constant(std::span<const double> xs) {
  for (double v : xs) {
    if (v != xs.front()) return false;
  }
  return true;
}

// Weighted variance with an exact zero for constant groups. Without the
// short-circuit a constant column yields a ~1e-31 variance from the rounding
// of sum(w)*c, and the z denominator becomes rounding noise instead of the
// intended degenerate-input rejection.
inline double group_variance(std::span<const double> values, std::span<const double> w) {
  const double var = weighted_variance(values, w);  // also validates the weights
  return is_constant(values) ? 0.0 : var;
}

}  // namespace detail

/// Difference of weighted group means over its estimated standard deviation.
/// Standard normal under the null of equal covariate distributions, for any
/// fixed weight vector.
inline ZResult z_continuous_mean(std::span<const double> x, std::span<const double> wx,
                                 std::span<const double> y, std::span<const double> wy,
                                 std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "z_continuous_mean");
  const double mx = weighted_mean(x, wx);
  const double my = weighted_mean(y, wy);
  const double vx = detail::group_variance(x, wx);
  const double vy = detail::group_variance(y, wy);
  const double sx = sum_sq_weights(wx);
  const double sy = sum_sq_weights(wy);
  const double denom_sq = vx * sx + vy * sy;
  if (!(denom_sq > 0.0)) {
    throw NumericError("z_continuous_mean: zero variance in both groups for '" + name + "'");
  }
  ZResult r;
  r.covariate = std::move(name);
  r.kind = ZKind::continuous_mean;
  r.z = (mx - my) / std::sqrt(denom_sq);
  r.components = {{"mean_treated", mx},
                  {"mean_control", my},
                  {"var_treated", vx},
                  {"var_control", vy},
                  {"sum_sq_w_treated", sx},
                  {"sum_sq_w_control", sy}};
  return r;
}

/// Pooled-variance variant of the continuous-mean z. Only used alongside the
/// weighted standardized difference; the report itself uses the unpooled form.
inline double z_continuous_mean_pooled(std::span<const double> x, std::span<const double> wx,
                                       std::span<const double> y, std::span<const double> wy) {
  detail::check_group_sizes(x, wx, y, wy, "z_continuous_mean_pooled");
  const double mx = weighted_mean(x, wx);
  const double my = weighted_mean(y, wy);
  const double pooled =
      0.5 * (detail::group_variance(x, wx) + detail::group_variance(y, wy));
  const double s = sum_sq_weights(wx) + sum_sq_weights(wy);
  if (!(pooled > 0.0)) {
    throw NumericError("z_continuous_mean_pooled: zero pooled variance");
  }
  return (mx - my) / std::sqrt(s * pooled);
}

/// Difference of weighted group variances over its estimated standard
/// deviation. Each group is centered at its own weighted mean; the variance of
/// the variance estimate comes from the weighted variance of the squared
/// centered values.
inline ZResult z_continuous_variance(std::span<const double> x, std::span<const double> wx,
                                     std::span<const double> y, std::span<const double> wy,
                                     std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "z_continuous_variance");
  if (detail::count_distinct(x) < 3 || detail::count_distinct(y) < 3) {
    throw NumericError("z_continuous_variance: each group needs at least 3 distinct "
                       "values for '" + name + "'");
  }
  const double mx = weighted_mean(x, wx);
  const double my = weighted_mean(y, wy);
  std::vector<double> tx(x.size()), ty(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mx;
    tx[i] = d * d;
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double d = y[j] - my;
    ty[j] = d * d;
  }
  const double vx = weighted_variance(x, wx);
  const double vy = weighted_variance(y, wy);
  const double vtx = weighted_variance(tx, wx);
  const double vty = weighted_variance(ty, wy);
  const double sx = sum_sq_weights(wx);
  const double sy = sum_sq_weights(wy);
  const double fx = 1.0 - sx;
  const double fy = 1.0 - sy;
  const double denom_sq = sx / (fx * fx) * vtx + sy / (fy * fy) * vty;
  if (!(denom_sq > 0.0)) {
    throw NumericError("z_continuous_variance: degenerate variance of variances for '" +
                       name + "'");
  }
  ZResult r;
  r.covariate = std::move(name);
  r.kind = ZKind::continuous_variance;
  r.z = (vx - vy) / std::sqrt(denom_sq);
  r.components = {{"mean_treated", mx},
                  {"mean_control", my},
                  {"var_treated", vx},
                  {"var_control", vy},
                  {"var_sq_centered_treated", vtx},
                  {"var_sq_centered_control", vty},
                  {"sum_sq_w_treated", sx},
                  {"sum_sq_w_control", sy}};
  return r;
}

/// Difference of weighted prevalences over its estimated standard deviation.
/// The variance term uses the weighted prevalences as well.
inline ZResult z_binary(std::span<const double> x, std::span<const double> wx,
                        std::span<const double> y, std::span<const double> wy,
                        std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "z_binary");
  for (double v : x) {
    if (v != 0.0 && v != 1.0) throw DataError("z_binary: treated values must be 0/1");
  }
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw DataError("z_binary: control values must be 0/1");
  }
  if (detail::is_constant(x) || detail::is_constant(y)) {
    throw NumericError("z_binary: a group is all-0 or all-1 for '" + name + "'");
  }
  const double px = weighted_mean(x, wx);
  const double py = weighted_mean(y, wy);
  const double sx = sum_sq_weights(wx);
  const double sy = sum_sq_weights(wy);
  const double denom_sq = sx * px * (1.0 - px) + sy * py * (1.0 - py);
  ZResult r;
  r.covariate = std::move(name);
  r.kind = ZKind::binary;
  r.z = (px - py) / std::sqrt(denom_sq);
  r.components = {{"prevalence_treated", px},
                  {"prevalence_control", py},
                  {"sum_sq_w_treated", sx},
                  {"sum_sq_w_control", sy}};
  return r;
}

/// Difference of weighted mean midranks over its null standard deviation.
/// Ranks are assigned on the pooled values only, ignoring the weights. The
/// rank variance and the cross covariance come from the exact permutation
/// null of the pooled midranks: var = mean squared deviation from (N+1)/2,
/// cov = -var/(N-1). With uniform weights and no ties this reproduces the
/// normal-approximation Wilcoxon rank-sum statistic.
inline ZResult z_ordinal(std::span<const double> x, std::span<const double> wx,
                         std::span<const double> y, std::span<const double> wy,
                         std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "z_ordinal");
  const std::size_t n = x.size(), m = y.size(), total = n + m;
  std::vector<double> pooled;
  pooled.reserve(total);
  pooled.insert(pooled.end(), x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::vector<double> ranks = detail::midranks(pooled);

  const double rbar = 0.5 * (static_cast<double>(total) + 1.0);
  CompensatedSum ss;
  for (double r : ranks) {
    const double d = r - rbar;
    ss.add(d * d);
  }
  const double rank_var = ss.value() / static_cast<double>(total);
  if (!(rank_var > 0.0)) {
    throw NumericError("z_ordinal: all pooled values tied for '" + name + "'");
  }
  const double rank_cov = -rank_var / (static_cast<double>(total) - 1.0);

  const std::span<const double> rx(ranks.data(), n);
  const std::span<const double> ry(ranks.data() + n, m);
  const double mrx = weighted_mean(rx, wx);
  const double mry = weighted_mean(ry, wy);
  const double sx = sum_sq_weights(wx);
  const double sy = sum_sq_weights(wy);
  const double denom_sq = (sx + sy) * (rank_var - rank_cov);

  ZResult r;
  r.covariate = std::move(name);
  r.kind = ZKind::ordinal;
  r.z = (mrx - mry) / std::sqrt(denom_sq);
  r.components = {{"mean_rank_treated", mrx},
                  {"mean_rank_control", mry},
                  {"rank_variance", rank_var},
                  {"rank_covariance", rank_cov},
                  {"sum_sq_w_treated", sx},
                  {"sum_sq_w_control", sy}};
  return r;
}

/// Weighted-histogram chi-square across categories, mapped to the normal
/// scale through the probability integral transform. Cell variances are the
/// per-category sums of squared weights. Categories empty in both groups are
/// dropped (reducing the degrees of freedom); categories empty in exactly one
/// group keep a finite contribution.
inline ZResult z_nominal(std::span<const double> x, std::span<const double> wx,
                         std::span<const double> y, std::span<const double> wy,
                         std::size_t n_categories, std::string name = {},
                         std::span<const std::string> labels = {}) {
  detail::check_group_sizes(x, wx, y, wy, "z_nominal");
  if (n_categories < 2) throw DataError("z_nominal: need at least 2 categories");

  auto category_label = [&](std::size_t k) {
    return k < labels.size() ? labels[k] : std::to_string(k + 1);
  };

  std::vector<CompensatedSum> px(n_categories), py(n_categories);
  std::vector<CompensatedSum> s2x(n_categories), s2y(n_categories);
  auto accumulate = [&](std::span<const double> vals, std::span<const double> w,
                        std::vector<CompensatedSum>& prob, std::vector<CompensatedSum>& var) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double v = vals[i];
      if (v < 1.0 || v > static_cast<double>(n_categories) || v != std::floor(v)) {
        throw DataError("z_nominal: category code out of range for '" + name + "'");
      }
      const auto k = static_cast<std::size_t>(v) - 1;
      prob[k].add(w[i]);
      var[k].add(w[i] * w[i]);
    }
  };
  accumulate(x, wx, px, s2x);
  accumulate(y, wy, py, s2y);

  ZResult r;
  r.covariate = std::move(name);
  r.kind = ZKind::nominal;

  CompensatedSum chi;
  std::size_t kept = 0;
  Components probs;
  for (std::size_t k = 0; k < n_categories; ++k) {
    const double cell_var = s2x[k].value() + s2y[k].value();
    if (cell_var == 0.0) {
      r.warnings.push_back("category '" + category_label(k) +
                           "' empty in both groups; dropped");
      continue;
    }
    ++kept;
    const double d = px[k].value() - py[k].value();
    chi.add(d * d / cell_var);
    probs.emplace_back("p_treated_" + category_label(k), px[k].value());
    probs.emplace_back("p_control_" + category_label(k), py[k].value());
  }
  if (kept < 2) {
    throw NumericError("z_nominal: fewer than 2 occupied categories for '" +
                       r.covariate + "'");
  }
  const double chi_sq = chi.value();
  const int df = static_cast<int>(kept) - 1;
  const double cdf = nudge_probability(chisq_cdf(chi_sq, df));
  r.z = normal_quantile(cdf);
  r.components = {{"chi_square", chi_sq},
                  {"df", static_cast<double>(df)},
                  {"chi_square_cdf", cdf}};
  r.components.insert(r.components.end(), probs.begin(), probs.end());
  return r;
}

/// Weighted standardized difference for continuous covariates: mean difference
/// over the square root of the pooled weighted variance (plain average of the
/// two group variances).
inline SdResult sd_weighted_continuous(std::span<const double> x, std::span<const double> wx,
                                       std::span<const double> y, std::span<const double> wy,
                                       std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "sd_weighted_continuous");
  const double mx = weighted_mean(x, wx);
  const double my = weighted_mean(y, wy);
  const double pooled =
      0.5 * (detail::group_variance(x, wx) + detail::group_variance(y, wy));
  if (!(pooled > 0.0)) {
    throw NumericError("sd_weighted_continuous: zero pooled variance for '" + name + "'");
  }
  SdResult r;
  r.covariate = std::move(name);
  r.sd = (mx - my) / std::sqrt(pooled);
  return r;
}

/// Weighted standardized difference for binary covariates.
inline SdResult sd_weighted_binary(std::span<const double> x, std::span<const double> wx,
                                   std::span<const double> y, std::span<const double> wy,
                                   std::string name = {}) {
  detail::check_group_sizes(x, wx, y, wy, "sd_weighted_binary");
  const double px = weighted_mean(x, wx);
  const double py = weighted_mean(y, wy);
  // constant groups contribute an exact zero, not sum-rounding noise
  const double var_x = detail::is_constant(x) ? 0.0 : px * (1.0 - px);
  const double var_y = detail::is_constant(y) ? 0.0 : py * (1.0 - py);
  const double pooled = 0.5 * (var_x + var_y);
  if (!(pooled > 0.0)) {
    throw NumericError("sd_weighted_binary: zero pooled variance for '" + name + "'");
  }
  SdResult r;
  r.covariate = std::move(name);
  r.sd = (px - py) / std::sqrt(pooled);
  return r;
}

struct ReportRow {
  std::string covariate;
  ZKind kind = ZKind::continuous_mean;
  std::optional<ZResult> z;
  std::optional<SdResult> sd;
  std::string error;  // empty when the row computed cleanly
};

struct ReportAggregates {
  double mean_abs_z = std::numeric_limits<double>::quiet_NaN();
  double var_z = std::numeric_limits<double>::quiet_NaN();
  std::size_t rows_used = 0;
};

/// Aggregates over the rows that produced a z value: mean absolute z, and the
/// sample (n-1 denominator) variance of z.
inline ReportAggregates compute_aggregates(const std::vector<ReportRow>& rows) {
  ReportAggregates agg;
  CompensatedSum abs_sum, sum;
  for (const auto& row : rows) {
    if (!row.z) continue;
    ++agg.rows_used;
    abs_sum.add(std::abs(row.z->z));
    sum.add(row.z->z);
  }
  if (agg.rows_used == 0) return agg;
  const auto k = static_cast<double>(agg.rows_used);
  agg.mean_abs_z = abs_sum.value() / k;
  if (agg.rows_used >= 2) {
    const double mean = sum.value() / k;
    CompensatedSum ss;
    for (const auto& row : rows) {
      if (!row.z) continue;
      const double d = row.z->z - mean;
      ss.add(d * d);
    }
    agg.var_z = ss.value() / (k - 1.0);
  }
  return agg;
}

struct BalanceReport {
  std::string method;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::vector<ReportRow> rows;
  ReportAggregates aggregates;
};

namespace detail {

/// Weighted share of each declared level, appended to the audit components.
inline void append_level_frequencies(ZResult& res, const CovariateColumn& col,
                                     const GroupSplit& g, std::span<const double> wx,
                                     std::span<const double> wy) {
  for (std::size_t k = 0; k < col.level_count(); ++k) {
    const double code = static_cast<double>(k + 1);
    CompensatedSum fx, fy;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      if (g.x[i] == code) fx.add(wx[i]);
    }
    for (std::size_t j = 0; j < g.y.size(); ++j) {
      if (g.y[j] == code) fy.add(wy[j]);
    }
    res.components.emplace_back("freq_treated_" + col.labels[k], fx.value());
    res.components.emplace_back("freq_control_" + col.labels[k], fy.value());
  }
}

}  // namespace detail

/// One row per covariate in declaration order, dispatched on its scale, then a
/// variance row per continuous covariate. Per-covariate failures are recorded
/// on the row instead of aborting the report.
inline BalanceReport build_report(const CohortSample& sample, const ScaledWeights& weights,
                                  std::string method = {}) {
  sample.validate();
  if (weights.w.size() != sample.size()) {
    throw DataError("build_report: weight vector does not match the cohort");
  }
  BalanceReport report;
  report.method = std::move(method);
  report.n_treated = sample.n_treated();
  report.n_control = sample.n_control();

  const std::vector<double> wx = weights.treated();
  const std::vector<double> wy = weights.control();

  auto add_row = [&](const CovariateColumn& col, ZKind kind) {
    const GroupSplit g = split_by_group(col.values, sample.treatment);
    ReportRow row;
    row.covariate = col.name;
    row.kind = kind;
    try {
      switch (kind) {
        case ZKind::continuous_mean:
          row.z = z_continuous_mean(g.x, wx, g.y, wy, col.name);
          row.sd = sd_weighted_continuous(g.x, wx, g.y, wy, col.name);
          break;
        case ZKind::continuous_variance:
          row.z = z_continuous_variance(g.x, wx, g.y, wy, col.name);
          break;
        case ZKind::binary:
          row.z = z_binary(g.x, wx, g.y, wy, col.name);
          row.sd = sd_weighted_binary(g.x, wx, g.y, wy, col.name);
          break;
        case ZKind::ordinal: {
          auto res = z_ordinal(g.x, wx, g.y, wy, col.name);
          detail::append_level_frequencies(res, col, g, wx, wy);
          row.z = std::move(res);
          break;
        }
        case ZKind::nominal: {
          auto res = z_nominal(g.x, wx, g.y, wy, col.level_count(), col.name, col.labels);
          row.z = std::move(res);
          break;
        }
      }
    } catch (const NumericError& e) {
      row.z.reset();
      row.sd.reset();
      row.error = e.what();
    } catch (const DataError& e) {
      row.z.reset();
      row.sd.reset();
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  };

  for (const auto& col : sample.covariates) {
    switch (col.scale) {
      case Scale::continuous: add_row(col, ZKind::continuous_mean); break;
      case Scale::binary: add_row(col, ZKind::binary); break;
      case Scale::ordinal: add_row(col, ZKind::ordinal); break;
      case Scale::nominal: add_row(col, ZKind::nominal); break;
    }
  }
  for (const auto& col : sample.covariates) {
    if (col.scale == Scale::continuous) add_row(col, ZKind::continuous_variance);
  }
  report.aggregates = compute_aggregates(report.rows);
  return report;
}

/// Ordered z values paired with standard normal quantiles at (i - 0.5)/P,
/// plus the two reference slopes drawn on balance Q-Q plots: 1 for the balance
/// expected under randomization, 0.5 for a perfectly matched sample.
struct QqData {
  std::vector<double> theoretical;
  std::vector<double> ordered;
  std::array<double, 2> reference_slopes{1.0, 0.5};
};

inline QqData qq_data(std::span<const double> zs) {
  if (zs.size() < 2) throw DataError("qq_data: need at least 2 z values");
  QqData out;
  out.ordered.assign(zs.begin(), zs.end());
  std::sort(out.ordered.begin(), out.ordered.end());
  const auto p = static_cast<double>(zs.size());
  out.theoretical.resize(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    out.theoretical[i] = normal_quantile((static_cast<double>(i) + 0.5) / p);
  }
  return out;
}

}  // namespace balance_forge
