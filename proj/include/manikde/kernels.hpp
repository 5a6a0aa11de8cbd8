#pragma once

#include <algorithm>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "manikde/common.hpp"
#include "manikde/geometry.hpp"

namespace manikde {

/// Radial kernel profile with regularity metadata. `oscillation` returns
/// conservative sup/inf bounds of the profile over a closed t-interval,
/// including one-sided limits at the interval endpoints, so a jump sitting
/// exactly on a partition edge is charged to the adjacent cells.
struct IsotropicKernel {
  std::string name;
  std::function<double(double)> profile;
  double k_sup = 0.0;
  double rho = 1.0;          // support radius when compact, decay onset otherwise
  double alpha = kInf;       // kInf means compact support on [0, rho]
  std::function<Interval(double, double)> oscillation;
  std::vector<double> breakpoints;      // piece edges for quadrature
  double value_trust_below = 0.0;       // below this t, profile values are surrogate
  double quad_resolvable_below = 0.0;   // below this t, quadrature cannot resolve

  bool compact_support() const { return alpha == kInf; }
};

/// Kernel on chart coordinates R^d with support inside [-R, R]^d.
struct ChartKernel {
  std::string name;
  int dim = 2;
  std::function<double(const Vec&)> profile;
  double support_halfwidth = 1.0;  // R
  double k_sup = 0.0;
  std::function<Interval(const Vec&, const Vec&)> oscillation;  // axis-aligned box [lo, hi]
};

struct StepLevel {
  double c;
  double a;
  double b;
};

namespace detail {

template <typename Fn>
double adaptive_simpson_rec(Fn&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename Fn>
double adaptive_simpson(Fn&& f, double a, double b, double tol, int depth = 48) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Piecewise profile on knots; pieces may be constant or monotone smooth.
/// piece_range(i, lo, hi) bounds the profile on [lo, hi] inside piece i
/// (piece i spans (knot[i], knot[i+1]); i = knots.size()-1 is the tail).
struct PiecewiseOsc {
  std::vector<double> knots;  // sorted
  std::function<Interval(std::size_t, double, double)> piece_range;
  std::function<double(double)> value_at;

  Interval operator()(double t0, double t1) const {
    t0 = std::max(0.0, t0);
    t1 = std::max(t0, t1);
    bool any = false;
    Interval acc{0.0, 0.0};
    auto add = [&](const Interval& v) {
      acc = any ? acc.hull(v) : v;
      any = true;
    };
    const std::size_t n = knots.size();
    auto piece_lo = [&](std::size_t i) { return knots[i]; };
    auto piece_hi = [&](std::size_t i) { return i + 1 < n ? knots[i + 1] : kInf; };
    // Piece index whose closure contains t; on a knot, start from the left
    // piece so the one-sided limit there is included.
    std::size_t i0 = 0;
    while (i0 + 1 < n && knots[i0 + 1] <= t0) ++i0;
    if (i0 > 0 && knots[i0] == t0) --i0;
    for (std::size_t i = i0; i < n; ++i) {
      if (piece_lo(i) > t1) break;
      const double lo = std::clamp(t0, piece_lo(i), piece_hi(i));
      const double hi = std::clamp(t1, piece_lo(i), piece_hi(i));
      add(piece_range(i, lo, hi));
      if (piece_hi(i) >= t1 && !(piece_hi(i) == t1)) break;
    }
    for (double k : knots)
      if (k >= t0 && k <= t1) add({value_at(k), value_at(k)});
    return acc;
  }
};

inline std::uint64_t double_bits(double x) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(x));
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

/// K(t) = sum_j c_j chi_{[a_j, b_j]}(t); exact piecewise-constant oscillation.
inline IsotropicKernel make_step_kernel(const std::vector<StepLevel>& levels) {
  if (levels.empty()) throw std::invalid_argument("step kernel: no levels");
  for (const auto& l : levels) {
    if (l.b < l.a || l.a < 0.0) throw std::invalid_argument("step kernel: need 0 <= a_j <= b_j");
  }
  std::vector<double> knots{0.0};
  for (const auto& l : levels) {
    knots.push_back(l.a);
    knots.push_back(l.b);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  auto value_at = [levels](double t) {
    double v = 0.0;
    for (const auto& l : levels)
      if (t >= l.a && t <= l.b) v += l.c;
    return v;
  };

  IsotropicKernel k;
  k.name = "step";
  k.profile = value_at;
  k.breakpoints = knots;
  double rho = 0.0, sup = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    sup = std::max(sup, std::abs(value_at(0.5 * (knots[i] + knots[i + 1]))));
  for (double kn : knots) sup = std::max(sup, std::abs(value_at(kn)));
  for (const auto& l : levels) rho = std::max(rho, l.b);
  k.k_sup = sup;
  k.rho = std::max(rho, 1e-300);
  k.alpha = kInf;

  detail::PiecewiseOsc osc;
  osc.knots = knots;
  osc.value_at = value_at;
  osc.piece_range = [value_at, knots](std::size_t i, double lo, double hi) -> Interval {
    const double mid =
        (i + 1 < knots.size()) ? 0.5 * (knots[i] + knots[i + 1]) : knots[i] + 1.0;
    (void)lo;
    (void)hi;
    const double v = value_at(mid);
    return {v, v};
  };
  k.oscillation = osc;
  return k;
}

/// Normalized uniform kernel on [0, rho] in dimension d:
/// K = d / (|S^{d-1}| rho^d) chi_{[0, rho]}.
inline IsotropicKernel make_uniform_kernel(double rho, int d) {
  if (rho <= 0.0) throw std::invalid_argument("uniform kernel: rho must be positive");
  const double c = d / (Sphere::sphere_area(d - 1) * std::pow(rho, d));
  IsotropicKernel k = make_step_kernel({{c, 0.0, rho}});
  k.name = "uniform";
  return k;
}

/// Example kernel: 1/3 on [0,1) u (1, 3/2], 1/t^2 at positive integers,
/// 0 elsewhere. d=1 normalization is exactly 1.
inline IsotropicKernel make_cantor_example_kernel() {
  IsotropicKernel k;
  k.name = "cantor";
  k.profile = [](double t) {
    if (t < 0.0) return 0.0;
    const double r = std::round(t);
    if (r >= 1.0 && t == r) return 1.0 / (t * t);
    if (t <= 1.5) return 1.0 / 3.0;
    return 0.0;
  };
  k.k_sup = 1.0;
  k.rho = 1.5;
  k.alpha = 2.0;
  k.breakpoints = {0.0, 1.5};
  k.oscillation = [](double t0, double t1) -> Interval {
    t0 = std::max(0.0, t0);
    t1 = std::max(t0, t1);
    bool any = false;
    Interval acc{0.0, 0.0};
    auto add = [&](double v) {
      acc = any ? acc.hull({v, v}) : Interval{v, v};
      any = true;
    };
    if (t0 <= 1.5) add(1.0 / 3.0);            // plateau value (with limits at 3/2)
    if (t0 <= 1.0 && t1 >= 1.0) add(1.0);     // spike at t = 1
    if (t1 >= 1.5) add(0.0);                  // zero region (limit at 3/2)
    const double klo = std::max(2.0, std::ceil(t0));
    if (klo <= std::floor(t1)) {
      add(1.0 / (klo * klo));                 // largest integer spike in range
      const double khi = std::floor(t1);
      add(1.0 / (khi * khi));
    }
    return acc;
  };
  return k;
}

/// Example kernel: sin(exp(exp(1/t))) on (0, 1], 0 at t = 0 and beyond 1.
/// Below `value_trust_below` the phase exceeds double precision; profile
/// values there use a deterministic surrogate phase (documented), which keeps
/// |K| <= 1 and the oscillation oracle conservative.
inline IsotropicKernel make_irregular_kernel() {
  constexpr double kTrust = 0.3;
  auto phase = [](double t) { return std::exp(std::exp(1.0 / t)); };
  IsotropicKernel k;
  k.name = "irregular";
  k.profile = [phase](double t) {
    if (t <= 0.0 || t > 1.0) return 0.0;
    if (t >= kTrust) return std::sin(phase(t));
    const std::uint64_t h = detail::double_bits(t) * 0x9E3779B97F4A7C15ULL;
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return std::sin(2.0 * kPi * u);
  };
  k.k_sup = 1.0;
  k.rho = 1.0;
  k.alpha = kInf;
  k.breakpoints = {0.0, 1.0};
  k.value_trust_below = kTrust;
  k.quad_resolvable_below = 0.45;
  k.oscillation = [phase](double t0, double t1) -> Interval {
    t0 = std::max(0.0, t0);
    t1 = std::max(t0, t1);
    bool any = false;
    Interval acc{0.0, 0.0};
    auto add = [&](const Interval& v) {
      acc = any ? acc.hull(v) : v;
      any = true;
    };
    if (t0 == 0.0 || t1 >= 1.0) add({0.0, 0.0});
    const double lo = std::max(t0, 1e-12), hi = std::min(t1, 1.0);
    if (lo <= hi) {
      if (lo < kTrust + 1e-12) {
        add({-1.0, 1.0});
      } else {
        const double plo = phase(hi), phi = phase(lo);  // phase decreasing in t
        if (phi - plo >= 2.0 * kPi) {
          add({-1.0, 1.0});
        } else {
          Interval r{std::sin(plo), std::sin(plo)};
          r = r.hull({std::sin(phi), std::sin(phi)});
          const double kmax = std::floor((phi - 0.5 * kPi) / (2.0 * kPi));
          if (0.5 * kPi + 2.0 * kPi * kmax >= plo) r = r.hull({r.lo, 1.0});
          const double kmin = std::floor((phi - 1.5 * kPi) / (2.0 * kPi));
          if (1.5 * kPi + 2.0 * kPi * kmin >= plo) r = r.hull({-1.0, r.hi});
          add(r);
        }
      }
    }
    return acc;
  };
  return k;
}

/// Truncated Gaussian profile e^{-t^2} on [0, cut].
inline IsotropicKernel make_truncated_gaussian(double cut = 3.0) {
  IsotropicKernel k;
  k.name = "gauss";
  k.profile = [cut](double t) { return (t >= 0.0 && t <= cut) ? std::exp(-t * t) : 0.0; };
  k.k_sup = 1.0;
  k.rho = cut;
  k.alpha = kInf;
  k.breakpoints = {0.0, cut};
  detail::PiecewiseOsc osc;
  osc.knots = k.breakpoints;
  osc.value_at = k.profile;
  osc.piece_range = [cut](std::size_t i, double lo, double hi) -> Interval {
    if (i >= 1) return {0.0, 0.0};
    return {std::exp(-hi * hi), std::exp(-lo * lo)};  // decreasing piece
  };
  k.oscillation = osc;
  return k;
}

/// Radial companion of the sphere chart kernel below, in the scaled variable
/// t = chord / eps: (1 - (a eps^2 / 2) t^2) chi_{[0,1]}(t).
inline IsotropicKernel make_quadratic_kernel(double eps, double a) {
  if (!(eps > 0.0 && eps < std::sqrt(2.0)))
    throw std::invalid_argument("quadratic kernel: need 0 < eps < sqrt(2)");
  const double q = 0.5 * a * eps * eps;
  IsotropicKernel k;
  k.name = "quadratic";
  k.profile = [q](double t) { return (t >= 0.0 && t <= 1.0) ? 1.0 - q * t * t : 0.0; };
  k.k_sup = std::max(1.0, std::abs(1.0 - q));
  k.rho = 1.0;
  k.alpha = kInf;
  k.breakpoints = {0.0, 1.0};
  detail::PiecewiseOsc osc;
  osc.knots = k.breakpoints;
  osc.value_at = k.profile;
  osc.piece_range = [q](std::size_t i, double lo, double hi) -> Interval {
    if (i >= 1) return {0.0, 0.0};
    const double va = 1.0 - q * lo * lo, vb = 1.0 - q * hi * hi;  // monotone piece
    return {std::min(va, vb), std::max(va, vb)};
  };
  k.oscillation = osc;
  return k;
}

/// Chart kernel of the sphere example: K_eps(v) = [1 - a + a cos |v|] on the
/// geodesic cap |v| <= r(eps) = arccos(1 - eps^2/2), expressed in the scaled
/// variable w = v / eps (support halfwidth R = r(eps)/eps). Returns the chart
/// kernel and its equivalent radial profile in t = chord/eps.
inline std::pair<ChartKernel, IsotropicKernel> make_lle_sphere_kernel(double eps, double a,
                                                                      int dim = 2) {
  if (!(eps > 0.0 && eps < std::sqrt(2.0)))
    throw std::invalid_argument("lle kernel: need 0 < eps < sqrt(2) (arccos domain)");
  const double r_eps = std::acos(1.0 - 0.5 * eps * eps);
  ChartKernel ck;
  ck.name = "lle";
  ck.dim = dim;
  ck.support_halfwidth = r_eps / eps;
  ck.k_sup = std::max(1.0, std::abs(1.0 - a + a * std::cos(r_eps)));
  ck.profile = [eps, a, r_eps](const Vec& w) {
    const double g = eps * w.norm();  // geodesic radius
    if (g > r_eps) return 0.0;
    return 1.0 - a + a * std::cos(g);
  };
  ck.oscillation = [eps, a, r_eps](const Vec& lo, const Vec& hi) -> Interval {
    double tmin2 = 0.0, tmax2 = 0.0;
    for (int i = 0; i < lo.size(); ++i) {
      const double l = lo[i], h = hi[i];
      const double nearest = (l > 0.0) ? l : (h < 0.0 ? h : 0.0);
      tmin2 += nearest * nearest;
      tmax2 += std::max(l * l, h * h);
    }
    const double gmin = eps * std::sqrt(tmin2), gmax = eps * std::sqrt(tmax2);
    auto val = [a](double g) { return 1.0 - a + a * std::cos(g); };
    Interval r{val(std::min(gmin, r_eps)), val(std::min(gmin, r_eps))};
    r = r.hull({val(std::min(gmax, r_eps)), val(std::min(gmax, r_eps))});
    if (gmax > r_eps) r = r.hull({0.0, 0.0});
    return r;
  };
  return {ck, make_quadratic_kernel(eps, a)};
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// |S^{d-1}| int_0^inf K(t) t^{d-1} dt, piecewise-adaptive between the
/// profile's breakpoints, with the polynomial tail bounded analytically.
/// Oscillatory profiles are integrated only where the phase is resolvable;
/// the skipped band is bounded by stationary-phase decay (looser, documented).
inline double normalization_integral(const IsotropicKernel& k, int d) {
  if (!k.compact_support() && !(k.alpha > d))
    throw std::invalid_argument("normalization_integral: divergent tail (alpha <= d)");
  const double tol = 1e-10;
  auto f = [&](double t) { return k.profile(t) * std::pow(t, d - 1); };

  std::vector<double> edges = k.breakpoints;
  edges.push_back(0.0);
  if (k.quad_resolvable_below > 0.0) edges.push_back(k.quad_resolvable_below);
  double t_end = k.rho;
  if (!k.compact_support()) {
    // Beyond t_end the tail admits |K| <= t^{-alpha}; extend until the bound
    // meets the tolerance (profile evaluations there are cheap).
    t_end = std::max(t_end, std::pow(tol * (k.alpha - d) / Sphere::sphere_area(d - 1),
                                     1.0 / (d - k.alpha)));
    t_end = std::min(t_end, 1e9);
  }
  edges.push_back(t_end);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    if (b <= a) continue;
    if (b <= k.quad_resolvable_below) continue;  // stationary-phase band: ~0
    // Evaluate each piece on its interior so point values sitting exactly on
    // a piece edge (null sets) do not contaminate the integral.
    const double eta = (b - a) * 1e-12;
    auto f_open = [&](double t) { return f(std::clamp(t, a + eta, b - eta)); };
    integral += detail::adaptive_simpson(f_open, a, b, 1e-11, 52);
  }
  return Sphere::sphere_area(d - 1) * integral;
}

/// Scale the profile so the d-dimensional normalization integral equals 1.
inline IsotropicKernel normalize(const IsotropicKernel& k, int d) {
  const double I = normalization_integral(k, d);
  if (std::abs(I) < 1e-12) throw numeric_error("normalize: degenerate kernel (integral ~ 0)");
  const double s = 1.0 / I;
  IsotropicKernel out = k;
  out.name = k.name;
  auto base_profile = k.profile;
  out.profile = [base_profile, s](double t) { return s * base_profile(t); };
  out.k_sup = std::abs(s) * k.k_sup;
  auto base_osc = k.oscillation;
  out.oscillation = [base_osc, s](double t0, double t1) {
    return base_osc(t0, t1).scaled(s);
  };
  return out;
}

}  // namespace manikde
