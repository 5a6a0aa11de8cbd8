#pragma once

#include <vector>

#include "manikde/geometry.hpp"

namespace manikde {

/// Smith-Volterra-Cantor construction on [0, pi/2]: level k removes from each
/// retained interval a middle open interval of length (pi/2) * 4^{-k}.
struct FatCantorParams {
  int depth = 10;
  double bump_amplitude = 0.05;
};

namespace detail {

struct OpenInterval {
  double a, b;
};

/// Logistic step phi_c: [0,1] -> [0,1], flat to all orders at 0 and 1,
/// strictly increasing inside, phi_c(c) = 1/2.
struct SmoothStep {
  double c;

  double operator()(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double h = c / u - (1.0 - c) / (1.0 - u);
    if (h > 700.0) return 0.0;
    if (h < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(h));
  }

  double deriv(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double h = c / u - (1.0 - c) / (1.0 - u);
    if (std::abs(h) > 690.0) return 0.0;
    const double p = 1.0 / (1.0 + std::exp(h));
    const double hp = -c / (u * u) - (1.0 - c) / sq(1.0 - u);
    return -hp * p * (1.0 - p);
  }
};

}  // namespace detail

/// Closed smooth plane curve whose outer arc (theta in [0, pi/2]) is
/// (1 + f(theta)) (cos theta, sin theta) with f vanishing exactly on the
/// level-`depth` SVC retained set; the closing arc dips through the origin at
/// theta = pi and stays strictly inside the open unit disc.
class FatCantorCurve : public CurveManifold {
 public:
  explicit FatCantorCurve(FatCantorParams params = {})
      : CurveManifold(ManifoldKind::FatCantorCurve, 0.0, 0.0, 0.0, descriptor_of(params)),
        params_(params) {
    if (params.depth < 1 || params.depth > 14)
      throw config_error("fatcantor: depth must be in 1..14");
    if (params.bump_amplitude <= 0.0 || params.bump_amplitude > 0.4)
      throw config_error("fatcantor: amplitude must be in (0, 0.4]");
    build_removed_intervals();
    finalize_lengths();
  }

  const FatCantorParams& params() const { return params_; }

  /// Lebesgue measure of the level-depth retained set, exact from the schedule.
  double retained_measure() const {
    const double L = 0.5 * kPi;
    double removed = 0.0;
    for (int k = 1; k <= params_.depth; ++k)
      removed += std::pow(2.0, k - 1) * std::pow(4.0, -k);
    return L * (1.0 - removed);
  }

  /// Arclength of the retained set's image on the curve (|gamma'| = 1 there).
  double retained_arclength() const { return retained_measure(); }

  bool in_retained_set(double theta) const {
    if (theta < 0.0 || theta > 0.5 * kPi) return false;
    return removed_index(theta) < 0;
  }

  const std::vector<detail::OpenInterval>& removed_intervals() const { return removed_; }

  /// Bump height f(theta); zero exactly on the retained set and off [0, pi/2].
  double bump(double theta) const {
    const int i = removed_index(theta);
    if (i < 0) return 0.0;
    const auto [a, b] = removed_[i];
    const double len = b - a;
    const double u = (theta - a) / len;
    return params_.bump_amplitude * len * len * bump_profile(u);
  }

  double bump_deriv(double theta) const {
    const int i = removed_index(theta);
    if (i < 0) return 0.0;
    const auto [a, b] = removed_[i];
    const double len = b - a;
    const double u = (theta - a) / len;
    return params_.bump_amplitude * len * bump_profile_deriv(u);
  }

  Vec curve(double theta) const override {
    theta = detail::wrap_angle(theta);
    if (theta <= 0.5 * kPi) {
      const double r = 1.0 + bump(theta);
      return vec2(r * std::cos(theta), r * std::sin(theta));
    }
    const auto [r, a] = closing_polar(theta);
    return vec2(r * std::cos(a), r * std::sin(a));
  }

  Vec curve_deriv(double theta) const override {
    theta = detail::wrap_angle(theta);
    if (theta <= 0.5 * kPi) {
      const double r = 1.0 + bump(theta);
      const double rp = bump_deriv(theta);
      const double ct = std::cos(theta), st = std::sin(theta);
      return vec2(rp * ct - r * st, rp * st + r * ct);
    }
    const double u = (theta - 0.5 * kPi) / (1.5 * kPi);
    const double phi = step_(u), dphi = step_.deriv(u) / (1.5 * kPi);
    const double r = 1.0 - 2.0 * phi, rp = -2.0 * dphi;
    const double a = theta - kPi * phi, ap = 1.0 - kPi * dphi;
    const double ca = std::cos(a), sa = std::sin(a);
    return vec2(rp * ca - r * ap * sa, rp * sa + r * ap * ca);
  }

 private:
  static std::string descriptor_of(const FatCantorParams& p) {
    return "fatcantor:depth=" + std::to_string(p.depth) + ",amp=" + fmt17(p.bump_amplitude);
  }

  // exp(-1/(4u(1-u))): max e^{-1} at the midpoint regardless of interval
  // length, so midpoints stay strictly positive at every depth.
  static double bump_profile(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double q = 4.0 * u * (1.0 - u);
    return std::exp(-1.0 / q);
  }

  static double bump_profile_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double q = 4.0 * u * (1.0 - u);
    if (q < 1.0 / 650.0) return 0.0;
    return std::exp(-1.0 / q) * 4.0 * (1.0 - 2.0 * u) / (q * q);
  }

  std::pair<double, double> closing_polar(double theta) const {
    const double u = (theta - 0.5 * kPi) / (1.5 * kPi);
    const double phi = step_(u);
    return {1.0 - 2.0 * phi, theta - kPi * phi};
  }

  void build_removed_intervals() {
    const double L = 0.5 * kPi;
    std::vector<detail::OpenInterval> retained{{0.0, L}};
    for (int k = 1; k <= params_.depth; ++k) {
      const double cut = L * std::pow(4.0, -k);
      std::vector<detail::OpenInterval> next;
      next.reserve(retained.size() * 2);
      for (const auto& [a, b] : retained) {
        const double mid = 0.5 * (a + b);
        removed_.push_back({mid - 0.5 * cut, mid + 0.5 * cut});
        next.push_back({a, mid - 0.5 * cut});
        next.push_back({mid + 0.5 * cut, b});
      }
      retained = std::move(next);
    }
    std::sort(removed_.begin(), removed_.end(),
              [](const detail::OpenInterval& x, const detail::OpenInterval& y) { return x.a < y.a; });
  }

  /// Index of the removed open interval strictly containing theta, or -1.
  int removed_index(double theta) const {
    if (theta <= 0.0 || theta >= 0.5 * kPi) return -1;
    int lo = 0, hi = static_cast<int>(removed_.size()) - 1;
    while (lo <= hi) {
      const int mid = (lo + hi) / 2;
      if (theta <= removed_[mid].a)
        hi = mid - 1;
      else if (theta >= removed_[mid].b)
        lo = mid + 1;
      else
        return mid;
    }
    return -1;
  }

  FatCantorParams params_;
  std::vector<detail::OpenInterval> removed_;
  detail::SmoothStep step_{1.0 / 3.0};
};

}  // namespace manikde
