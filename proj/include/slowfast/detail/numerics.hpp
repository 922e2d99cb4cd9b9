#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace slowfast::detail {

/// Plain bisection on a sign change of `f` over [lo, hi]. Returns the final
/// bracket; `f(lo)` and `f(hi)` must have opposite signs (zero counts as
/// either sign).
template <class F>
std::pair<double, double> bisect(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
  double f_lo = f(lo);
  for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return {mid, mid};
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

/// Pairwise summation in a fixed traversal order; the result depends only on
/// the input sequence, never on how the caller partitioned the work.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double x : values) s += x;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace slowfast::detail
