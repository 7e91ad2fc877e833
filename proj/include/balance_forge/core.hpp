#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "balance_forge/errors.hpp"
#include "balance_forge/numeric.hpp"

namespace balance_forge {

enum class Scale { continuous, binary, ordinal, nominal };

inline std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::continuous: return "continuous";
    case Scale::binary: return "binary";
    case Scale::ordinal: return "ordinal";
    case Scale::nominal: return "nominal";
  }
  return "?";
}

inline Scale scale_from_string(std::string_view s) {
  if (s == "continuous") return Scale::continuous;
  if (s == "binary") return Scale::binary;
  if (s == "ordinal") return Scale::ordinal;
  if (s == "nominal") return Scale::nominal;
  throw DataError("unknown covariate scale '" + std::string(s) + "'");
}

/// One named covariate. Binary values are 0/1; ordinal and nominal values are
/// 1-based level codes, with `labels` naming the codes in declared order.
struct CovariateColumn {
  std::string name;
  Scale scale = Scale::continuous;
  std::vector<double> values;
  std::vector<std::string> labels;  // ordinal level order / nominal categories

  std::size_t level_count() const { return labels.size(); }
};

/// A two-group cohort: treatment indicators plus covariate columns, with
/// optional precomputed weights or propensity scores carried along.
struct CohortSample {
  std::vector<std::uint8_t> treatment;  // 1 = treated, 0 = control
  std::vector<CovariateColumn> covariates;
  std::optional<std::vector<double>> raw_weights;
  std::optional<std::vector<double>> propensity;

  std::size_t size() const { return treatment.size(); }

  std::size_t n_treated() const {
    std::size_t n = 0;
    for (auto t : treatment) n += (t != 0);
    return n;
  }

  std::size_t n_control() const { return size() - n_treated(); }

  void validate() const;
};

inline void CohortSample::validate() const {
  const std::size_t n_units = size();
  const std::size_t n = n_treated();
  const std::size_t m = n_units - n;
  if (n < 2 || m < 2) {
    throw DataError("cohort needs at least 2 treated and 2 control units (got " +
                    std::to_string(n) + " treated, " + std::to_string(m) + " control)");
  }
  for (const auto& col : covariates) {
    if (col.values.size() != n_units) {
      throw DataError("covariate '" + col.name + "' has " +
                      std::to_string(col.values.size()) + " values; expected " +
                      std::to_string(n_units));
    }
    switch (col.scale) {
      case Scale::continuous:
        for (double v : col.values) {
          if (!std::isfinite(v)) {
            throw DataError("covariate '" + col.name + "' contains a non-finite value");
          }
        }
        break;
      case Scale::binary:
        for (double v : col.values) {
          if (v != 0.0 && v != 1.0) {
            throw DataError("binary covariate '" + col.name + "' contains a value other than 0/1");
          }
        }
        break;
      case Scale::ordinal:
      case Scale::nominal: {
        const auto levels = static_cast<double>(col.level_count());
        if (col.level_count() < 2) {
          throw DataError("covariate '" + col.name + "' needs at least 2 declared levels");
        }
        for (double v : col.values) {
          if (v < 1.0 || v > levels || v != std::floor(v)) {
            throw DataError("covariate '" + col.name + "' contains a code outside its declared levels");
          }
        }
        break;
      }
    }
  }
  if (raw_weights && raw_weights->size() != n_units) {
    throw DataError("raw weight vector length does not match the cohort");
  }
  if (propensity && propensity->size() != n_units) {
    throw DataError("propensity vector length does not match the cohort");
  }
}

/// Per-group normalized weights: they sum to one within the treated group and
/// within the control group.
struct ScaledWeights {
  std::vector<double> w;
  std::vector<std::uint8_t> treatment;

  std::vector<double> treated() const {
    std::vector<double> out;
    out.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (treatment[i]) out.push_back(w[i]);
    }
    return out;
  }

  std::vector<double> control() const {
    std::vector<double> out;
    out.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!treatment[i]) out.push_back(w[i]);
    }
    return out;
  }
};

/// Divide each unit's weight by its group total. Order within a group is
/// preserved; a global rescaling of the input does not change the result.
inline ScaledWeights scale_weights(std::span<const double> raw,
                                   std::span<const std::uint8_t> treatment) {
  if (raw.size() != treatment.size()) {
    throw DataError("scale_weights: weight and treatment lengths differ");
  }
  CompensatedSum sum_treated, sum_control;
  std::size_t n = 0, m = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > 0.0) || !std::isfinite(raw[i])) {
      throw DataError("scale_weights: weight at index " + std::to_string(i) +
                      " must be positive and finite (got " + std::to_string(raw[i]) + ")");
    }
    if (treatment[i]) {
      sum_treated.add(raw[i]);
      ++n;
    } else {
      sum_control.add(raw[i]);
      ++m;
    }
  }
  if (n == 0 || m == 0) throw DataError("scale_weights: both groups must be non-empty");

  ScaledWeights out;
  out.w.resize(raw.size());
  out.treatment.assign(treatment.begin(), treatment.end());
  const double st = sum_treated.value();
  const double sc = sum_control.value();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.w[i] = raw[i] / (treatment[i] ? st : sc);
  }
  return out;
}

/// Weighted mean over one group slice: sum of w_i * x_i with scaled weights.
inline double weighted_mean(std::span<const double> values, std::span<const double> w) {
  if (values.size() != w.size()) {
    throw DataError("weighted_mean: value and weight lengths differ");
  }
  return compensated_dot(w, values);
}

/// Sum of squared weights over a group slice. Equals 1/n for uniform weights.
inline double sum_sq_weights(std::span<const double> w) {
  CompensatedSum acc;
  for (double wi : w) acc.add(wi * wi);
  return acc.value();
}

/// Weighted variance with the 1/(1 - sum w^2) small-sample correction. With
/// uniform weights this is the usual n-1 denominator sample variance.
inline double weighted_variance(std::span<const double> values, std::span<const double> w) {
  if (values.size() != w.size()) {
    throw DataError("weighted_variance: value and weight lengths differ");
  }
  const double s2 = sum_sq_weights(w);
  if (s2 >= 1.0) {
    throw NumericError("weighted_variance: sum of squared weights >= 1 "
                       "(weight mass concentrated on a single unit)");
  }
  const double mean = weighted_mean(values, w);
  CompensatedSum acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    acc.add(w[i] * d * d);
  }
  return acc.value() / (1.0 - s2);
}

/// Covariate values split by group, in unit order; aligned with
/// ScaledWeights::treated() / control().
struct GroupSplit {
  std::vector<double> x;  // treated
  std::vector<double> y;  // control
};

inline GroupSplit split_by_group(std::span<const double> values,
                                 std::span<const std::uint8_t> treatment) {
  if (values.size() != treatment.size()) {
    throw DataError("split_by_group: value and treatment lengths differ");
  }
  GroupSplit out;
  out.x.reserve(values.size());
  out.y.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    (treatment[i] ? out.x : out.y).push_back(values[i]);
  }
  return out;
}

}  // namespace balance_forge
