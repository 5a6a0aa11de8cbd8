#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace manikde {

// Ambient/parameter vectors are small (p <= 8 for the shipped manifolds):
// dynamic size with fixed stack capacity avoids heap churn in the hot loops.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 8, 1>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

/// Closed interval [lo, hi]; used for oscillation bounds and range tracking.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }

  Interval hull(const Interval& o) const {
    return {std::min(lo, o.lo), std::max(hi, o.hi)};
  }

  Interval scaled(double c) const {
    return c >= 0 ? Interval{c * lo, c * hi} : Interval{c * hi, c * lo};
  }

  // Product with a nonnegative interval [a.lo, a.hi], a.lo >= 0.
  Interval times_nonneg(const Interval& a) const {
    double cands[4] = {lo * a.lo, lo * a.hi, hi * a.lo, hi * a.hi};
    Interval r{cands[0], cands[0]};
    for (double c : cands) {
      r.lo = std::min(r.lo, c);
      r.hi = std::max(r.hi, c);
    }
    return r;
  }
};

/// Invalid run configuration (bad descriptor, incompatible resolutions, ...).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric procedure could not reach its goal (budget exceeded, divergence).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// 17 significant digits: round-trips binary64 exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace manikde
