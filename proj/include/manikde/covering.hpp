#pragma once

#include <vector>

#include "manikde/kernels.hpp"

namespace manikde {

/// Probe for the L^2(P) geometry of the translate family {K(a - .), a in [0,1]}
/// with P uniform on [0,1]. The radial profile is extended evenly to negative
/// arguments. `resolution` fixes the z-grid of the discrete metric used for
/// packing (an exact metric for the grid measure).
struct CoveringProbe {
  IsotropicKernel kernel;
  int resolution = 8192;

  double translate(double a, double z) const { return kernel.profile(std::abs(a - z)); }
};

namespace detail {

/// Split points of [0,1] where K(a - .) or K(b - .) may jump.
inline std::vector<double> translate_breakpoints(const CoveringProbe& probe, double a, double b) {
  std::vector<double> cuts{0.0, 1.0, a, b};
  for (double bp : probe.kernel.breakpoints) {
    for (double s : {-bp, bp}) {
      cuts.push_back(a + s);
      cuts.push_back(b + s);
    }
  }
  std::vector<double> out;
  for (double c : cuts)
    if (c >= 0.0 && c <= 1.0) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// For the oscillatory example kernel: z-positions inside [plo, phi] where
/// the phase exp(exp(1/|z - s|)) crosses multiples of pi/2. Segmenting at
/// these points makes each segment span at most a quarter period, which
/// plain Gauss quadrature resolves. The piece must lie on one side of s.
inline void add_phase_edges(double s, double plo, double phi, std::vector<double>& edges) {
  auto theta = [](double t) { return std::exp(std::exp(1.0 / t)); };
  auto inv = [](double ph) { return 1.0 / std::log(std::log(ph)); };
  const bool left = phi <= s;
  const double tmin = left ? s - phi : plo - s;
  const double tmax = left ? s - plo : phi - s;
  if (tmin >= 1.0) return;  // outside the kernel support: no oscillation
  const double ph_hi = theta(std::max(tmin, 1e-3));
  const double ph_lo = theta(std::min(tmax, 1.0));
  const double step = 0.5 * kPi;
  for (double ph = ph_hi - step; ph > std::max(ph_lo, std::exp(1.5)); ph -= step) {
    const double t = inv(ph);
    const double z = left ? s - t : s + t;
    if (z > plo && z < phi) edges.push_back(z);
  }
}

}  // namespace detail

/// d_{L^2(P)}(K(a - .), K(b - .)) with P uniform on [0,1], by piecewise
/// adaptive quadrature split at every potential jump. For the irregular
/// kernel the bands within `value_trust_below`-resolvability of a or b are
/// skipped entirely; since the integrand is nonnegative the result is a
/// certified lower bound of the true distance (documented).
inline double l2_translate_distance(const CoveringProbe& probe, double a, double b) {
  if (a == b) return 0.0;
  const double t_skip =
      probe.kernel.value_trust_below > 0.0 ? probe.kernel.quad_resolvable_below : 0.0;

  auto diff2 = [&](double z) { return sq(probe.translate(a, z) - probe.translate(b, z)); };

  const auto cuts = detail::translate_breakpoints(probe, a, b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    if (hi - lo < 1e-15) continue;
    if (t_skip > 0.0) {
      // Clip the unresolvable windows around the two singular points.
      std::vector<std::pair<double, double>> parts{{lo, hi}};
      for (double s : {a, b}) {
        std::vector<std::pair<double, double>> next;
        for (auto [plo, phi] : parts) {
          const double wlo = s - t_skip, whi = s + t_skip;
          if (whi <= plo || wlo >= phi) {
            next.push_back({plo, phi});
            continue;
          }
          if (wlo > plo) next.push_back({plo, wlo});
          if (whi < phi) next.push_back({whi, phi});
        }
        parts = std::move(next);
      }
      for (auto [plo, phi] : parts) {
        if (phi - plo < 1e-12) continue;
        std::vector<double> edges{plo, phi};
        detail::add_phase_edges(a, plo, phi, edges);
        detail::add_phase_edges(b, plo, phi, edges);
        std::sort(edges.begin(), edges.end());
        for (std::size_t j = 0; j + 1 < edges.size(); ++j)
          total += detail::gauss5(diff2, edges[j], edges[j + 1]);
      }
    } else {
      const double eta = (hi - lo) * 1e-12;
      auto f_open = [&](double z) { return diff2(std::clamp(z, lo + eta, hi - eta)); };
      total += detail::adaptive_simpson(f_open, lo, hi, 1e-13, 44);
    }
  }
  return std::sqrt(std::max(0.0, total));
}

struct PackingResult {
  int count = 0;
  bool grid_warning = false;  // candidate grid coarser than 10/eps
  bool capped = false;        // greedy stopped at the round cap
};

/// Greedy farthest-point packing of the translate family on a uniform
/// candidate grid, measured in the discrete L^2 metric on the probe's z-grid.
/// Certified lower bound of the packing number for that measure; `max_count`
/// caps the greedy rounds (the bound only improves with more rounds).
inline PackingResult packing_number(const CoveringProbe& probe, double eps_metric,
                                    int candidate_grid, int max_count = 256) {
  if (!(eps_metric > 0.0)) throw std::invalid_argument("packing_number: eps must be positive");
  if (candidate_grid < 2) throw std::invalid_argument("packing_number: need >= 2 candidates");
  PackingResult result;
  result.grid_warning = candidate_grid < 10.0 / eps_metric;

  const int res = probe.resolution;
  const int nc = candidate_grid;
  // K-vectors on the z-grid, stored as floats (distance tolerances here are
  // far above float noise).
  std::vector<float> table(static_cast<std::size_t>(nc) * res);
  for (int i = 0; i < nc; ++i) {
    const double ai = static_cast<double>(i) / (nc - 1);
    for (int j = 0; j < res; ++j) {
      const double z = (j + 0.5) / res;
      table[static_cast<std::size_t>(i) * res + j] = static_cast<float>(probe.translate(ai, z));
    }
  }
  auto dist2 = [&](int i, int k) {
    const float* pi = &table[static_cast<std::size_t>(i) * res];
    const float* pk = &table[static_cast<std::size_t>(k) * res];
    double s = 0.0;
    for (int j = 0; j < res; ++j) s += sq(static_cast<double>(pi[j]) - pk[j]);
    return s / res;
  };

  std::vector<double> mind2(nc, kInf);
  int current = 0;  // start from translate a = 0
  const double eps2 = eps_metric * eps_metric;
  for (int round = 1;; ++round) {
    result.count = round;
    if (round >= max_count) {
      result.capped = true;
      break;
    }
    double best = -1.0;
    int arg = -1;
    for (int i = 0; i < nc; ++i) {
      mind2[i] = std::min(mind2[i], dist2(i, current));
      if (mind2[i] > best) {
        best = mind2[i];
        arg = i;
      }
    }
    if (best <= eps2) break;  // everything is within eps of the chosen set
    current = arg;
  }
  return result;
}

struct WitnessRow {
  double delta = 0.0;
  double anchor = 0.0;
  double lhs = 0.0;  // l2 translate distance (lower bound for the irregular kernel)
  double rhs = 0.0;  // -1 / (160 log delta)
  bool pass = false;
};

/// Checks d(K(a + delta - .), K(a - .)) > -1/(160 log delta) on a 10-anchor
/// grid for each delta.
inline std::vector<WitnessRow> non_vc_witness(const CoveringProbe& probe,
                                              const std::vector<double>& deltas) {
  std::vector<WitnessRow> rows;
  for (double delta : deltas) {
    if (!(delta > 0.0 && delta <= 0.1))
      throw std::invalid_argument("non_vc_witness: delta must be in (0, 0.1]");
    for (int i = 0; i < 10; ++i) {
      WitnessRow r;
      r.delta = delta;
      r.anchor = (1.0 - delta) * i / 9.0;
      r.lhs = l2_translate_distance(probe, r.anchor, r.anchor + delta);
      r.rhs = -1.0 / (160.0 * std::log(delta));
      r.pass = r.lhs > r.rhs;
      rows.push_back(r);
    }
  }
  return rows;
}

/// Distance in the discrete z-grid metric (exact metric for the grid measure;
/// used by the packing machinery and the metric-axiom checks).
inline double grid_l2_distance(const CoveringProbe& probe, double a, double b) {
  double s = 0.0;
  for (int j = 0; j < probe.resolution; ++j) {
    const double z = (j + 0.5) / probe.resolution;
    s += sq(probe.translate(a, z) - probe.translate(b, z));
  }
  return std::sqrt(s / probe.resolution);
}

}  // namespace manikde
