#pragma once

// Reference implementations written directly from the defining formulas in
// long double arithmetic. They deliberately share no code with the library:
// the chi-square CDF comes from quadrature, the normal quantile from
// bisection, and the rank statistics from O(N^2) counting. Tests compare the
// library against these as an independent computation path.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using ld = long double;
using vec = std::vector<ld>;

inline vec to_ld(const std::vector<double>& xs) { return vec(xs.begin(), xs.end()); }

inline ld wmean(const vec& x, const vec& w) {
  ld s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
  return s;
}

inline ld sumsq(const vec& w) {
  ld s = 0;
  for (ld wi : w) s += wi * wi;
  return s;
}

inline ld wvar(const vec& x, const vec& w) {
  const ld m = wmean(x, w);
  ld s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (x[i] - m) * (x[i] - m);
  return s / (1.0L - sumsq(w));
}

inline ld z_continuous_mean(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  return (wmean(x, wx) - wmean(y, wy)) /
         sqrtl(wvar(x, wx) * sumsq(wx) + wvar(y, wy) * sumsq(wy));
}

inline ld sd_continuous(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  return (wmean(x, wx) - wmean(y, wy)) / sqrtl(0.5L * (wvar(x, wx) + wvar(y, wy)));
}

inline ld z_continuous_variance(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  const ld mx = wmean(x, wx), my = wmean(y, wy);
  vec tx(x.size()), ty(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) tx[i] = (x[i] - mx) * (x[i] - mx);
  for (std::size_t j = 0; j < y.size(); ++j) ty[j] = (y[j] - my) * (y[j] - my);
  const ld sx = sumsq(wx), sy = sumsq(wy);
  return (wvar(x, wx) - wvar(y, wy)) /
         sqrtl(sx / ((1.0L - sx) * (1.0L - sx)) * wvar(tx, wx) +
               sy / ((1.0L - sy) * (1.0L - sy)) * wvar(ty, wy));
}

inline ld z_binary(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  const ld px = wmean(x, wx), py = wmean(y, wy);
  return (px - py) /
         sqrtl(sumsq(wx) * px * (1.0L - px) + sumsq(wy) * py * (1.0L - py));
}

inline ld sd_binary(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  const ld px = wmean(x, wx), py = wmean(y, wy);
  return (px - py) / sqrtl(0.5L * (px * (1.0L - px) + py * (1.0L - py)));
}

// Midranks by direct counting (the count of equals includes the element itself).
inline vec midranks(const vec& pooled) {
  const std::size_t n = pooled.size();
  vec ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) ++less;
      else if (pooled[j] == pooled[i]) ++equal;
    }
    ranks[i] = static_cast<ld>(less) + 0.5L * (static_cast<ld>(equal) + 1.0L);
  }
  return ranks;
}

inline ld z_ordinal(const vec& x, const vec& wx, const vec& y, const vec& wy) {
  vec pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const vec ranks = midranks(pooled);
  const auto total = static_cast<ld>(pooled.size());
  const ld rbar = 0.5L * (total + 1.0L);
  ld var = 0;
  for (ld r : ranks) var += (r - rbar) * (r - rbar);
  var /= total;
  const ld cov = -var / (total - 1.0L);
  ld mrx = 0, mry = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mrx += wx[i] * ranks[i];
  for (std::size_t j = 0; j < y.size(); ++j) mry += wy[j] * ranks[x.size() + j];
  return (mrx - mry) / sqrtl((sumsq(wx) + sumsq(wy)) * (var - cov));
}

// Classical rank-sum z for the untied uniform-weight case.
inline ld wilcoxon_z(const vec& x, const vec& y) {
  vec pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const vec ranks = midranks(pooled);
  ld w_stat = 0;
  for (std::size_t i = 0; i < x.size(); ++i) w_stat += ranks[i];
  const auto n = static_cast<ld>(x.size());
  const auto m = static_cast<ld>(y.size());
  const ld total = n + m;
  return (w_stat - n * (total + 1.0L) / 2.0L) / sqrtl(n * m * (total + 1.0L) / 12.0L);
}

struct NominalChi {
  ld chi_square = 0;
  int df = 0;
};

inline NominalChi chi_square_nominal(const vec& x, const vec& wx, const vec& y,
                                     const vec& wy, std::size_t k_categories) {
  NominalChi out;
  int kept = 0;
  for (std::size_t k = 1; k <= k_categories; ++k) {
    ld px = 0, py = 0, s2x = 0, s2y = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == static_cast<ld>(k)) {
        px += wx[i];
        s2x += wx[i] * wx[i];
      }
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] == static_cast<ld>(k)) {
        py += wy[j];
        s2y += wy[j] * wy[j];
      }
    }
    if (s2x + s2y == 0.0L) continue;
    ++kept;
    out.chi_square += (px - py) * (px - py) / (s2x + s2y);
  }
  out.df = kept - 1;
  return out;
}

inline ld normal_cdf(ld t) { return 0.5L * erfcl(-t / sqrtl(2.0L)); }

inline double normal_quantile(double p) {
  ld lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const ld mid = 0.5L * (lo + hi);
    (normal_cdf(mid) < static_cast<ld>(p) ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline ld chisq_pdf(ld t, int df) {
  return expl((0.5L * df - 1.0L) * logl(t) - 0.5L * t - 0.5L * df * logl(2.0L) -
              lgammal(0.5L * df));
}

namespace detail {

inline ld simpson_rec(ld (*f)(ld, int), int df, ld a, ld b, ld fa, ld fb, ld fm, ld whole,
                      ld tol, int depth) {
  const ld m = 0.5L * (a + b);
  const ld lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const ld flm = f(lm, df), frm = f(rm, df);
  const ld left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const ld right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  if (depth <= 0 || fabsl(left + right - whole) < 15.0L * tol) {
    return left + right + (left + right - whole) / 15.0L;
  }
  return simpson_rec(f, df, a, m, fa, fm, flm, left, 0.5L * tol, depth - 1) +
         simpson_rec(f, df, m, b, fm, fb, frm, right, 0.5L * tol, depth - 1);
}

inline ld simpson(ld (*f)(ld, int), int df, ld a, ld b, ld tol) {
  const ld fa = f(a, df), fb = f(b, df), fm = f(0.5L * (a + b), df);
  const ld whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  return simpson_rec(f, df, a, b, fa, fb, fm, whole, tol, 60);
}

}  // namespace detail

// df = 1 and 2 have exact closed forms; larger df integrates the density.
inline double chisq_cdf(double x, int df) {
  if (x <= 0.0) return 0.0;
  if (df == 1) return static_cast<double>(erfl(sqrtl(static_cast<ld>(x) / 2.0L)));
  if (df == 2) return static_cast<double>(-expm1l(-static_cast<ld>(x) / 2.0L));
  return static_cast<double>(
      detail::simpson(&chisq_pdf, df, 1e-30L, static_cast<ld>(x), 1e-16L));
}

inline double z_nominal(const vec& x, const vec& wx, const vec& y, const vec& wy,
                        std::size_t k_categories) {
  const NominalChi chi = chi_square_nominal(x, wx, y, wy, k_categories);
  double p = chisq_cdf(static_cast<double>(chi.chi_square), chi.df);
  if (p >= 1.0) p = 1.0 - 1e-16;
  if (p <= 0.0) p = 1e-300;
  return normal_quantile(p);
}

// Unweighted counterparts for the uniform-weight reductions.

inline ld sample_mean(const vec& x) {
  ld s = 0;
  for (ld v : x) s += v;
  return s / static_cast<ld>(x.size());
}

inline ld sample_var(const vec& x) {
  const ld m = sample_mean(x);
  ld s = 0;
  for (ld v : x) s += (v - m) * (v - m);
  return s / (static_cast<ld>(x.size()) - 1.0L);
}

inline ld unweighted_z_continuous(const vec& x, const vec& y) {
  return (sample_mean(x) - sample_mean(y)) /
         sqrtl(sample_var(x) / static_cast<ld>(x.size()) +
               sample_var(y) / static_cast<ld>(y.size()));
}

inline ld unweighted_sd_continuous(const vec& x, const vec& y) {
  return (sample_mean(x) - sample_mean(y)) /
         sqrtl(0.5L * (sample_var(x) + sample_var(y)));
}

inline ld unweighted_z_binary(const vec& x, const vec& y) {
  const ld px = sample_mean(x), py = sample_mean(y);
  return (px - py) / sqrtl(px * (1.0L - px) / static_cast<ld>(x.size()) +
                           py * (1.0L - py) / static_cast<ld>(y.size()));
}

inline NominalChi unweighted_chi_square_nominal(const vec& x, const vec& y,
                                                std::size_t k_categories) {
  const auto n = static_cast<ld>(x.size());
  const auto m = static_cast<ld>(y.size());
  NominalChi out;
  int kept = 0;
  for (std::size_t k = 1; k <= k_categories; ++k) {
    ld cx = 0, cy = 0;
    for (ld v : x) cx += (v == static_cast<ld>(k));
    for (ld v : y) cy += (v == static_cast<ld>(k));
    if (cx == 0.0L && cy == 0.0L) continue;
    ++kept;
    const ld diff = cx / n - cy / m;
    out.chi_square += diff * diff / (cx / (n * n) + cy / (m * m));
  }
  out.df = kept - 1;
  return out;
}

}  // namespace oracle
