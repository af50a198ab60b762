#pragma once

#include <cmath>
#include <numbers>

namespace aok::detail {

/// Binary entropy in bits of a (possibly weighted) two-class count.
inline double entropy_bits(double a, double b) {
  const double n = a + b;
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : {a, b}) {
    if (c <= 0.0) continue;
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h / std::numbers::ln2;
}

/// Threshold strictly between two distinct sorted values such that
/// `lo <= t < hi`, even when they are adjacent doubles.
inline double midpoint(double lo, double hi) {
  const double t = lo + (hi - lo) / 2.0;
  return t < hi ? t : lo;
}

}  // namespace aok::detail
