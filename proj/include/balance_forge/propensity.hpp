#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "balance_forge/core.hpp"
#include "balance_forge/errors.hpp"
#include "balance_forge/numeric.hpp"

namespace balance_forge {

enum class WeightScheme { uniform, iptw, matching, overlap, att, atc };

inline std::string_view to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::uniform: return "uniform";
    case WeightScheme::iptw: return "iptw";
    case WeightScheme::matching: return "matching";
    case WeightScheme::overlap: return "overlap";
    case WeightScheme::att: return "att";
    case WeightScheme::atc: return "atc";
  }
  return "?";
}

inline WeightScheme weight_scheme_from_string(std::string_view s) {
  if (s == "uniform") return WeightScheme::uniform;
  if (s == "iptw") return WeightScheme::iptw;
  if (s == "matching") return WeightScheme::matching;
  if (s == "overlap") return WeightScheme::overlap;
  if (s == "att") return WeightScheme::att;
  if (s == "atc") return WeightScheme::atc;
  throw DataError("unknown weight scheme '" + std::string(s) + "'");
}

/// Dense row-major matrix, just big enough for small regression designs.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> col_names;

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Intercept plus main effects: continuous/binary/ordinal covariates enter as
/// one column each (ordinal as its integer codes), nominal covariates as K-1
/// indicator columns against the first category.
inline DesignMatrix build_design(const CohortSample& sample) {
  const std::size_t n_units = sample.size();
  DesignMatrix design;
  design.col_names.push_back("(intercept)");
  for (const auto& col : sample.covariates) {
    if (col.scale == Scale::nominal) {
      for (std::size_t k = 1; k < col.level_count(); ++k) {
        design.col_names.push_back(col.name + "=" + col.labels[k]);
      }
    } else {
      design.col_names.push_back(col.name);
    }
  }
  design.rows = n_units;
  design.cols = design.col_names.size();
  design.data.assign(design.rows * design.cols, 0.0);
  for (std::size_t i = 0; i < n_units; ++i) {
    design.at(i, 0) = 1.0;
    std::size_t c = 1;
    for (const auto& col : sample.covariates) {
      if (col.scale == Scale::nominal) {
        const auto code = static_cast<std::size_t>(col.values[i]);
        for (std::size_t k = 1; k < col.level_count(); ++k) {
          design.at(i, c++) = (code == k + 1) ? 1.0 : 0.0;
        }
      } else {
        design.at(i, c++) = col.values[i];
      }
    }
  }
  return design;
}

struct PropensityModel {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> fitted_ps;  // strictly inside (0,1)
  bool converged = false;
  bool separation = false;
  int iterations = 0;
  double deviance = std::numeric_limits<double>::quiet_NaN();
  double score_norm = std::numeric_limits<double>::quiet_NaN();  // max |X'(t - p)|
  std::string diagnostic;
};

namespace detail {

inline double sigmoid(double eta) {
  double p;
  if (eta >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-eta));
  } else {
    const double e = std::exp(eta);
    p = e / (1.0 + e);
  }
  // keep fitted probabilities strictly inside (0,1)
  if (p >= 1.0) p = 1.0 - 1e-16;
  if (p <= 0.0) p = 1e-300;
  return p;
}

inline double log1p_exp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

// Cholesky factorization in place; returns the index of the failing pivot or
// -1 on success.
inline int cholesky(std::vector<double>& a, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    double d = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
    if (!(d > 0.0)) return static_cast<int>(j);
    d = std::sqrt(d);
    a[j * p + j] = d;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = s / d;
    }
  }
  return -1;
}

inline void cholesky_solve(const std::vector<double>& l, std::size_t p,
                           std::vector<double>& b) {
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * p + k] * b[k];
    b[i] = s / l[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= l[k * p + ii] * b[k];
    b[ii] = s / l[ii * p + ii];
  }
}

}  // namespace detail

/// Logistic regression by iteratively reweighted least squares.
/// Converges when the relative deviance change drops below 1e-10 (with
/// step-halving on deviance increases), capped at 50 iterations. Perfect
/// separation is flagged rather than thrown.
inline PropensityModel fit_logistic(const DesignMatrix& design,
                                    std::span<const std::uint8_t> treatment) {
  const std::size_t n_units = design.rows;
  const std::size_t p = design.cols;
  if (treatment.size() != n_units) {
    throw DataError("fit_logistic: treatment length does not match the design");
  }
  if (n_units < p) {
    throw DataError("fit_logistic: need at least as many observations as design columns");
  }
  std::size_t n1 = 0;
  for (auto t : treatment) n1 += (t != 0);
  if (n1 == 0 || n1 == n_units) {
    throw DataError("fit_logistic: both treatment groups must be non-empty");
  }

  constexpr int kMaxIter = 50;
  constexpr double kDevTol = 1e-10;

  const bool has_intercept = [&] {
    for (std::size_t i = 0; i < n_units; ++i) {
      if (design.at(i, 0) != 1.0) return false;
    }
    return true;
  }();

  std::vector<double> beta(p, 0.0);
  if (has_intercept) {
    const double rate = static_cast<double>(n1) / static_cast<double>(n_units);
    beta[0] = std::log(rate / (1.0 - rate));
  }

  std::vector<double> eta(n_units), prob(n_units);
  auto update_fit = [&](const std::vector<double>& b) {
    double dev = 0.0;
    for (std::size_t i = 0; i < n_units; ++i) {
      double e = 0.0;
      for (std::size_t c = 0; c < p; ++c) e += design.at(i, c) * b[c];
      eta[i] = e;
      prob[i] = detail::sigmoid(e);
      dev += detail::log1p_exp(e) - (treatment[i] ? e : 0.0);
    }
    return 2.0 * dev;
  };

  double deviance = update_fit(beta);
  bool dev_converged = false;
  bool last_step_decreased = false;
  int iter = 0;

  std::vector<double> xtwx(p * p), xtwz(p);
  for (; iter < kMaxIter; ++iter) {
    std::fill(xtwx.begin(), xtwx.end(), 0.0);
    std::fill(xtwz.begin(), xtwz.end(), 0.0);
    for (std::size_t i = 0; i < n_units; ++i) {
      const double w = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
      const double z = eta[i] + (static_cast<double>(treatment[i] ? 1 : 0) - prob[i]) / w;
      for (std::size_t r = 0; r < p; ++r) {
        const double xw = design.at(i, r) * w;
        xtwz[r] += xw * z;
        for (std::size_t c = 0; c <= r; ++c) {
          xtwx[r * p + c] += xw * design.at(i, c);
        }
      }
    }
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = r + 1; c < p; ++c) xtwx[r * p + c] = xtwx[c * p + r];
    }

    std::vector<double> chol = xtwx;
    const int bad = detail::cholesky(chol, p);
    if (bad >= 0) {
      throw NumericError("fit_logistic: singular weighted normal equations at column '" +
                         design.col_names[static_cast<std::size_t>(bad)] + "'");
    }
    std::vector<double> beta_new = xtwz;
    detail::cholesky_solve(chol, p, beta_new);

    double dev_new = update_fit(beta_new);
    int halvings = 0;
    while (dev_new > deviance + 1e-12 && halvings < 30) {
      for (std::size_t c = 0; c < p; ++c) beta_new[c] = 0.5 * (beta_new[c] + beta[c]);
      dev_new = update_fit(beta_new);
      ++halvings;
    }

    const double change = deviance - dev_new;
    last_step_decreased = change > 0.0;
    beta = beta_new;
    const bool done = std::abs(change) <= kDevTol * (std::abs(dev_new) + 0.1);
    deviance = dev_new;
    if (done) {
      dev_converged = true;
      ++iter;
      break;
    }
  }

  PropensityModel model;
  model.coefficients = beta;
  model.fitted_ps = prob;
  model.iterations = iter;
  model.deviance = deviance;

  double score_norm = 0.0;
  for (std::size_t c = 0; c < p; ++c) {
    CompensatedSum g;
    for (std::size_t i = 0; i < n_units; ++i) {
      g.add(design.at(i, c) * ((treatment[i] ? 1.0 : 0.0) - prob[i]));
    }
    score_norm = std::max(score_norm, std::abs(g.value()));
  }
  model.score_norm = score_norm;

  // Separation: fitted probabilities pinned at the boundary while the fit
  // keeps improving, or a perfect (zero-deviance) fit of every unit.
  const bool ps_escaped = std::any_of(prob.begin(), prob.end(), [](double q) {
    return q < 1e-10 || q > 1.0 - 1e-10;
  });
  const bool perfect_fit = deviance <= 1e-8 * static_cast<double>(n_units);
  if (ps_escaped && (perfect_fit || (!dev_converged && last_step_decreased))) {
    model.separation = true;
    model.diagnostic =
        "possible perfect separation: fitted probabilities reached the 0/1 "
        "boundary with diverging coefficients";
  } else if (!dev_converged) {
    model.diagnostic = "iteration cap reached before the deviance stabilized";
  }
  model.converged = !model.separation && dev_converged &&
                    score_norm <= 1e-6 * std::max(1.0, static_cast<double>(n_units));

  // standard errors from the inverse of the final weighted information matrix
  std::fill(xtwx.begin(), xtwx.end(), 0.0);
  for (std::size_t i = 0; i < n_units; ++i) {
    const double w = prob[i] * (1.0 - prob[i]);
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c <= r; ++c) {
        xtwx[r * p + c] += design.at(i, r) * w * design.at(i, c);
      }
    }
  }
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = r + 1; c < p; ++c) xtwx[r * p + c] = xtwx[c * p + r];
  }
  std::vector<double> chol = xtwx;
  if (detail::cholesky(chol, p) < 0) {
    model.std_errors.resize(p);
    std::vector<double> e(p);
    for (std::size_t c = 0; c < p; ++c) {
      std::fill(e.begin(), e.end(), 0.0);
      e[c] = 1.0;
      detail::cholesky_solve(chol, p, e);
      model.std_errors[c] = std::sqrt(std::max(e[c], 0.0));
    }
  }
  return model;
}

/// Raw (unscaled) weights for a propensity vector. Callers normalize with
/// scale_weights afterwards.
inline std::vector<double> compute_weights(std::span<const double> ps,
                                           std::span<const std::uint8_t> treatment,
                                           WeightScheme scheme) {
  if (ps.size() != treatment.size()) {
    throw DataError("compute_weights: propensity and treatment lengths differ");
  }
  std::vector<double> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double e = ps[i];
    if (!(e > 0.0 && e < 1.0)) {
      throw DataError("compute_weights: propensity score at index " + std::to_string(i) +
                      " must lie strictly inside (0,1), got " + std::to_string(e));
    }
    const bool treated = treatment[i] != 0;
    switch (scheme) {
      case WeightScheme::uniform:
        out[i] = 1.0;
        break;
      case WeightScheme::iptw:
        out[i] = treated ? 1.0 / e : 1.0 / (1.0 - e);
        break;
      case WeightScheme::matching:
        out[i] = std::min(e, 1.0 - e) / (treated ? e : 1.0 - e);
        break;
      case WeightScheme::overlap:
        out[i] = treated ? 1.0 - e : e;
        break;
      case WeightScheme::att:
        out[i] = treated ? 1.0 : e / (1.0 - e);
        break;
      case WeightScheme::atc:
        out[i] = treated ? (1.0 - e) / e : 1.0;
        break;
    }
  }
  return out;
}

/// Elementwise clamp of propensity scores into [lo, hi].
inline std::vector<double> clip_ps(std::span<const double> ps, double lo, double hi) {
  if (!(lo > 0.0 && lo < hi && hi < 1.0)) {
    throw DataError("clip_ps: need 0 < lo < hi < 1");
  }
  std::vector<double> out(ps.begin(), ps.end());
  for (double& e : out) e = std::clamp(e, lo, hi);
  return out;
}

}  // namespace balance_forge
