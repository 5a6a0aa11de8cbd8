#pragma once

#include <array>

#include "manikde/fat_cantor.hpp"
#include "manikde/kernels.hpp"

namespace manikde {

struct DarbouxLevel {
  int level = 0;       // m = 2^level
  std::uint64_t m = 0;
  double upper = 0.0;  // U_m
  double lower = 0.0;  // L_m
  double gap = 0.0;    // U_m - L_m
};

/// Dyadic Darboux brackets for g(theta) = K(|gamma(theta) - x| / eps) |gamma'(theta)|
/// over the parameter interval. Bounds are computed once on the finest lattice
/// and aggregated upward, so U_m is nonincreasing and L_m nondecreasing by
/// construction while remaining sound brackets of every Riemann sum.
struct DarbouxReport {
  std::vector<DarbouxLevel> levels;  // coarse to fine

  double finest_gap() const { return levels.empty() ? 0.0 : levels.back().gap; }
};

enum class IntegrabilityVerdict { IntegrableLikely, NotIntegrableLikely, Inconclusive };

namespace detail {

struct CellBounds {
  Interval g;  // bounds of the integrand on the cell
};

/// Sound per-cell bounds of g on [t0, t1]: sampled ranges padded via the
/// Lipschitz facts |D'| <= |gamma'| (distance to a fixed point is 1-Lipschitz
/// in arclength) and a sampled global bound on d|gamma'|/dtheta.
inline CellBounds bound_cell(const CurveManifold& curve, const IsotropicKernel& kernel,
                             double eps, const Vec& anchor, double t0, double t1,
                             double speed_lip) {
  constexpr int kSamples = 8;
  double dmin = kInf, dmax = -kInf, smin = kInf, smax = -kInf;
  for (int j = 0; j <= kSamples; ++j) {
    const double th = t0 + (t1 - t0) * j / kSamples;
    const double dist = (curve.curve(th) - anchor).norm();
    const double sp = curve.speed(th);
    dmin = std::min(dmin, dist);
    dmax = std::max(dmax, dist);
    smin = std::min(smin, sp);
    smax = std::max(smax, sp);
  }
  const double gap = (t1 - t0) / (2.0 * kSamples);
  const double pad_s = speed_lip * gap;
  const Interval speed{std::max(0.0, smin - pad_s), smax + pad_s};
  const double pad_d = speed.hi * gap;
  const Interval dist{std::max(0.0, dmin - pad_d), dmax + pad_d};
  const Interval kv = kernel.oscillation(dist.lo / eps, dist.hi / eps);
  return {kv.times_nonneg(speed)};
}

inline double sampled_speed_lipschitz(const CurveManifold& curve) {
  const int n = 1 << 14;
  double best = 0.0;
  double prev = curve.speed(0.0);
  for (int i = 1; i <= n; ++i) {
    const double th = 2.0 * kPi * i / n;
    const double sp = curve.speed(th);
    best = std::max(best, std::abs(sp - prev) / (2.0 * kPi / n));
    prev = sp;
  }
  return 2.0 * best;  // sampled bound, doubled for safety
}

}  // namespace detail

/// Darboux bracket (L_m, U_m) at a single refinement m (power of two).
inline std::pair<double, double> darboux_sums(const CurveManifold& curve,
                                              const IsotropicKernel& kernel, double eps,
                                              const Vec& anchor, std::uint64_t m) {
  if ((m & (m - 1)) != 0 || m == 0)
    throw std::invalid_argument("darboux_sums: m must be a power of two");
  const double speed_lip = detail::sampled_speed_lipschitz(curve);
  const double width = 2.0 * kPi / static_cast<double>(m);
  double upper = 0.0, lower = 0.0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto cb =
        detail::bound_cell(curve, kernel, eps, anchor, i * width, (i + 1) * width, speed_lip);
    upper += cb.g.hi * width;
    lower += cb.g.lo * width;
  }
  return {lower, upper};
}

/// Brackets at m = 8, 16, ..., 2^levels with nested dyadic aggregation.
inline DarbouxReport darboux_report(const CurveManifold& curve, const IsotropicKernel& kernel,
                                    double eps, const Vec& anchor, int levels) {
  if (levels < 4 || levels > 22) throw std::invalid_argument("darboux_report: levels in 4..22");
  const double speed_lip = detail::sampled_speed_lipschitz(curve);
  const std::uint64_t m_fine = 1ull << levels;
  const double width = 2.0 * kPi / static_cast<double>(m_fine);
  std::vector<Interval> bounds(m_fine);
  for (std::uint64_t i = 0; i < m_fine; ++i)
    bounds[i] =
        detail::bound_cell(curve, kernel, eps, anchor, i * width, (i + 1) * width, speed_lip).g;

  DarbouxReport rep;
  std::vector<DarbouxLevel> reversed;
  for (int level = levels; level >= 3; --level) {
    const std::uint64_t m = 1ull << level;
    const double w = 2.0 * kPi / static_cast<double>(m);
    DarbouxLevel dl;
    dl.level = level;
    dl.m = m;
    for (const Interval& b : bounds) {
      dl.upper += b.hi * w;
      dl.lower += b.lo * w;
    }
    dl.gap = dl.upper - dl.lower;
    reversed.push_back(dl);
    if (level > 3) {
      std::vector<Interval> up(m / 2);
      for (std::uint64_t i = 0; i < m / 2; ++i) up[i] = bounds[2 * i].hull(bounds[2 * i + 1]);
      bounds = std::move(up);
    }
  }
  rep.levels.assign(reversed.rbegin(), reversed.rend());
  return rep;
}

/// Trend-based verdict: gaps must both clear the threshold and keep shrinking
/// by >= 1.5x per doubling to call the restriction Riemann integrable; a gap
/// that stays put (within 20% over two doublings) above the threshold is the
/// non-integrable signature.
inline IntegrabilityVerdict integrability_verdict(const DarbouxReport& rep, double threshold) {
  const auto& ls = rep.levels;
  if (ls.size() < 4) throw std::invalid_argument("integrability_verdict: need >= 4 levels");
  const std::size_t n = ls.size();
  bool shrinking = true;
  for (std::size_t i = n - 3; i < n; ++i)
    if (!(ls[i].gap <= ls[i - 1].gap / 1.5)) shrinking = false;
  if (ls.back().gap < threshold && shrinking) return IntegrabilityVerdict::IntegrableLikely;
  const bool above = ls[n - 1].gap > threshold && ls[n - 2].gap > threshold && ls[n - 3].gap > threshold;
  const bool stalled = ls[n - 1].gap >= 0.8 * ls[n - 3].gap;
  if (above && stalled) return IntegrabilityVerdict::NotIntegrableLikely;
  return IntegrabilityVerdict::Inconclusive;
}

// ---------------------------------------------------------------------------
// Critical set of the ambient distance function restricted to a curve.
// ---------------------------------------------------------------------------

enum class CriticalSetVerdict { JordanMeasurableLikely, NotJordanMeasurableLikely, Inconclusive };

struct CriticalSetReport {
  Vec anchor;
  double resolution = 0.0;                        // h
  std::vector<std::pair<double, double>> cover;   // merged parameter intervals at h
  double critical_measure = 0.0;                  // total cover length at h
  double flat_measure = 0.0;                      // flat-zero cells only, at h
  std::array<double, 3> resolutions{};            // h, h/2, h/4
  std::array<double, 3> cover_measures{};         // outer measure of the critical set
  std::array<double, 3> boundary_measures{};      // outer measure of its boundary
  std::array<std::size_t, 3> boundary_cells{};    // boundary cell counts
  CriticalSetVerdict verdict = CriticalSetVerdict::Inconclusive;
};

namespace detail {

struct CriticalScan {
  std::vector<bool> critical;
  std::vector<bool> flat;
  double cell = 0.0;
};

inline CriticalScan scan_critical_cells(const CurveManifold& curve, const Vec& anchor, double h,
                                        double tol) {
  constexpr int kSamples = 8;
  const auto ncells = static_cast<std::size_t>(std::ceil(2.0 * kPi / h));
  const double cell = 2.0 * kPi / static_cast<double>(ncells);
  CriticalScan scan;
  scan.cell = cell;
  scan.critical.assign(ncells, false);
  scan.flat.assign(ncells, false);
  auto dderiv = [&](double th) {
    const Vec g = curve.curve(th);
    const Vec gp = curve.curve_deriv(th);
    const Vec delta = g - anchor;
    const double dist = delta.norm();
    if (dist < 1e-12) return gp.norm();  // transversal pass through the anchor
    return delta.dot(gp) / dist;
  };
  for (std::size_t i = 0; i < ncells; ++i) {
    bool all_small = true, sign_change = false;
    double prev = 0.0;
    for (int j = 0; j <= kSamples; ++j) {
      const double v = dderiv(i * cell + cell * j / kSamples);
      if (std::abs(v) >= tol) all_small = false;
      if (j > 0 && ((prev < -tol && v > tol) || (prev > tol && v < -tol))) sign_change = true;
      prev = v;
    }
    scan.flat[i] = all_small;
    scan.critical[i] = all_small || sign_change;
  }
  return scan;
}

}  // namespace detail

/// Brackets the zeros of d/dtheta |gamma(theta) - anchor| by sign changes and
/// whole-cell flat-zero detection at resolutions h, h/2, h/4; the verdict
/// comes from how the boundary cover responds to refinement.
inline CriticalSetReport critical_set(const CurveManifold& curve, const Vec& anchor, double h,
                                      double flat_tol = 1e-10) {
  if (!(h > 0.0 && h < kPi)) throw std::invalid_argument("critical_set: need 0 < h < pi");
  CriticalSetReport rep;
  rep.anchor = anchor;
  rep.resolution = h;
  for (int k = 0; k < 3; ++k) {
    const double hk = h / static_cast<double>(1 << k);
    const auto scan = detail::scan_critical_cells(curve, anchor, hk, flat_tol);
    const std::size_t n = scan.critical.size();
    double cover = 0.0, flat = 0.0;
    std::size_t boundary_cells = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!scan.critical[i]) continue;
      cover += scan.cell;
      if (scan.flat[i]) flat += scan.cell;
      const bool left = scan.critical[(i + n - 1) % n];
      const bool right = scan.critical[(i + 1) % n];
      if (!left || !right) ++boundary_cells;
    }
    rep.resolutions[k] = hk;
    rep.cover_measures[k] = cover;
    rep.boundary_cells[k] = boundary_cells;
    rep.boundary_measures[k] = boundary_cells * scan.cell;
    if (k == 0) {
      rep.critical_measure = cover;
      rep.flat_measure = flat;
      for (std::size_t i = 0; i < n; ++i) {
        if (!scan.critical[i]) continue;
        const double a = i * scan.cell, b = (i + 1) * scan.cell;
        if (!rep.cover.empty() && std::abs(rep.cover.back().second - a) < 1e-12)
          rep.cover.back().second = b;
        else
          rep.cover.push_back({a, b});
      }
    }
  }

  // A Jordan-measurable critical set keeps a bounded number of boundary
  // cells (its boundary is finite here), so the boundary cover shrinks like
  // h. A fat-Cantor-style boundary keeps resolving new gaps: the cell count
  // grows like h^{-1/2} and the cover measure stalls relative to h.
  if (rep.boundary_cells[0] == 0 && rep.boundary_cells[1] == 0 && rep.boundary_cells[2] == 0) {
    rep.verdict = CriticalSetVerdict::JordanMeasurableLikely;
  } else {
    const double growth = (static_cast<double>(rep.boundary_cells[2]) + 1.0) /
                          (static_cast<double>(rep.boundary_cells[0]) + 1.0);
    if (growth >= 1.6)
      rep.verdict = CriticalSetVerdict::NotJordanMeasurableLikely;
    else if (growth <= 1.2)
      rep.verdict = CriticalSetVerdict::JordanMeasurableLikely;
    else
      rep.verdict = CriticalSetVerdict::Inconclusive;
  }
  return rep;
}

}  // namespace manikde
