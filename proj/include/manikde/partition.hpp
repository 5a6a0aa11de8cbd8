#pragma once

#include <cstdint>
#include <string>

#include "manikde/kernels.hpp"

namespace manikde {

/// Result of the uniform-cube partition search. `found == false` means the
/// cube budget was exhausted before the oscillation condition held (reported,
/// not fatal; happens for kernels whose partition number is astronomically
/// large, e.g. the irregular example kernel).
struct PartitionReport {
  double gamma = 0.0;
  int dim = 1;
  double domain_halfwidth = 0.0;  // D_lip * gamma^{-1/alpha}, or D_lip * rho
  bool found = false;
  std::uint64_t cubes_per_axis = 0;  // m
  std::uint64_t cube_count = 0;      // N = m^d
  double cube_side = 0.0;
  double osc_sum = 0.0;              // sum_i (M_i - m_i) Vol(Q_i) at the reported m
};

namespace detail {

/// Range of |v| over the axis-aligned cube [lo_i, hi_i]^d.
inline Interval cube_radial_range(const double* lo, const double* hi, int d) {
  double near2 = 0.0, far2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double nearest = (lo[i] > 0.0) ? lo[i] : (hi[i] < 0.0 ? hi[i] : 0.0);
    near2 += nearest * nearest;
    far2 += std::max(lo[i] * lo[i], hi[i] * hi[i]);
  }
  return {std::sqrt(near2), std::sqrt(far2)};
}

}  // namespace detail

/// sum over the m^d uniform cubes of (sup - inf)(K(|v|)) * Vol(Q), via the
/// kernel's radial oscillation oracle on each cube's |v|-range (exact for
/// radial profiles, conservative otherwise). Cubes are visited in fixed
/// lexicographic order.
inline double partition_osc_sum(const IsotropicKernel& k, double halfwidth,
                                std::uint64_t m, int d) {
  const double side = 2.0 * halfwidth / static_cast<double>(m);
  const double cell_vol = std::pow(side, d);
  double total = 0.0;
  if (d == 1) {
    for (std::uint64_t i = 0; i < m; ++i) {
      const double lo = -halfwidth + side * static_cast<double>(i);
      const double hi = (i + 1 == m) ? halfwidth : lo + side;
      const Interval tr = detail::cube_radial_range(&lo, &hi, 1);
      total += k.oscillation(tr.lo, tr.hi).width() * cell_vol;
    }
    return total;
  }
  std::uint64_t count = 1;
  for (int i = 0; i < d; ++i) count *= m;
  double lo[8], hi[8];
  std::uint64_t idx[8] = {0};
  for (std::uint64_t c = 0; c < count; ++c) {
    for (int i = 0; i < d; ++i) {
      lo[i] = -halfwidth + side * static_cast<double>(idx[i]);
      hi[i] = (idx[i] + 1 == m) ? halfwidth : lo[i] + side;
    }
    const Interval tr = detail::cube_radial_range(lo, hi, d);
    total += k.oscillation(tr.lo, tr.hi).width() * cell_vol;
    for (int i = 0; i < d; ++i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return total;
}

/// Smallest cubes-per-axis m (doubling then bisection) with osc_sum < gamma^2
/// and m-1 failing; N = m^d. Domain is [-H, H]^d with H = D_lip gamma^{-1/alpha}
/// for polynomial decay and H = D_lip rho for compact support.
inline PartitionReport partition_number(const IsotropicKernel& k, double gamma, double d_lip,
                                        int d, std::uint64_t cube_budget = 1ull << 30) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("partition_number: need 0 < gamma < 1");
  if (d_lip < 1.0) throw std::invalid_argument("partition_number: need D_lip >= 1");
  if (d < 1 || d > 8) throw std::invalid_argument("partition_number: need 1 <= d <= 8");

  PartitionReport rep;
  rep.gamma = gamma;
  rep.dim = d;
  rep.domain_halfwidth =
      k.compact_support() ? d_lip * k.rho : d_lip * std::pow(gamma, -1.0 / k.alpha);

  const double target = gamma * gamma;
  auto cubes_of = [d](std::uint64_t m) {
    std::uint64_t c = 1;
    for (int i = 0; i < d; ++i) c *= m;
    return c;
  };
  auto passes = [&](std::uint64_t m) {
    return partition_osc_sum(k, rep.domain_halfwidth, m, d) < target;
  };

  std::uint64_t lo = 0, hi = 1;  // invariant: lo fails (0 = no partition), hi candidate
  while (!passes(hi)) {
    lo = hi;
    hi *= 2;
    if (cubes_of(hi) > cube_budget) {
      rep.found = false;
      rep.cubes_per_axis = hi;
      return rep;
    }
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (passes(mid))
      hi = mid;
    else
      lo = mid;
  }
  rep.found = true;
  rep.cubes_per_axis = hi;
  rep.cube_count = cubes_of(hi);
  rep.cube_side = 2.0 * rep.domain_halfwidth / static_cast<double>(hi);
  rep.osc_sum = partition_osc_sum(k, rep.domain_halfwidth, hi, d);
  return rep;
}

}  // namespace manikde
