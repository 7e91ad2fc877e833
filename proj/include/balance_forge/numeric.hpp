#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <span>

namespace balance_forge {

/// Compensated (Neumaier) accumulator. Terms are added strictly left to
/// right, so a given input sequence always produces the same bits.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Compensated sum of elementwise products. Sizes must match (caller checks).
inline double compensated_dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

/// Round to `digits` significant decimal digits. Non-finite values pass through.
inline double round_sig(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

inline double round_sig12(double v) { return round_sig(v, 12); }

}  // namespace balance_forge
