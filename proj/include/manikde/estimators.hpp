#pragma once

#include <unordered_map>

#include "manikde/kernels.hpp"
#include "manikde/sampling.hpp"

namespace manikde {

/// Two-point kernel on ambient coordinates (Lebesgue flavor), already bound
/// to a bandwidth: 0 <= value <= k_sup / eps^alpha, value = 0 beyond ambient
/// distance eps.
struct PairKernel {
  std::string name;
  double eps = 0.1;
  double alpha = 1.0;  // blowup exponent, >= d
  double k_sup = 1.0;
  bool normalized_per_x = true;
  std::function<double(const Vec&, const Vec&)> evaluate;  // (ambient x, ambient y)
};

/// Indicator of the ambient eps-ball, normalized per x by the manifold volume
/// it cuts out (closed forms on the circle and S^2).
inline PairKernel make_ball_pair_kernel(const Manifold& m, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("ball pair kernel: eps must be positive");
  PairKernel pk;
  pk.name = "ballpair";
  pk.eps = eps;
  pk.alpha = m.intrinsic_dim();
  pk.normalized_per_x = true;
  double ball_volume = 0.0;
  if (m.kind() == ManifoldKind::Circle && eps < 2.0) {
    ball_volume = 4.0 * std::asin(0.5 * eps);
    pk.k_sup = 0.5;
  } else if (m.kind() == ManifoldKind::Sphere && m.intrinsic_dim() == 2 && eps < 2.0) {
    ball_volume = kPi * eps * eps;  // cap area 2 pi (1 - cos g) with 1 - cos g = eps^2/2
    pk.k_sup = 1.0 / kPi;
  } else {
    throw config_error("ball pair kernel: closed-form normalization only on circle and S^2");
  }
  const double inv = 1.0 / ball_volume;
  pk.evaluate = [eps, inv](const Vec& xa, const Vec& ya) {
    return (xa - ya).norm() <= eps ? inv : 0.0;
  };
  return pk;
}

/// Emits a warning string when the bandwidth exceeds the manifold diameter
/// (allowed, but the estimator degenerates to a global average).
inline std::optional<std::string> bandwidth_warning(const Manifold& m, double eps) {
  if (eps > m.geodesic_diameter())
    return "bandwidth " + fmt17(eps) + " exceeds manifold diameter " +
           fmt17(m.geodesic_diameter());
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fixed-radius neighbor index over ambient points.
// ---------------------------------------------------------------------------

/// Hash grid with cubic cells; query returns a superset of the indices within
/// the radius, sorted ascending so within-cell sums have a fixed order.
class GridBucketIndex {
 public:
  GridBucketIndex(const Eigen::MatrixXd& points, double cell_size)
      : points_(points), cell_(cell_size), dim_(static_cast<int>(points.rows())) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("bucket index: cell size must be positive");
    if (dim_ > 4) throw config_error("bucket index: ambient dimension must be <= 4");
    const int n = static_cast<int>(points.cols());
    buckets_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) buckets_[key_of(points.col(i))].push_back(i);
  }

  void query_ball(const Vec& center, double radius, std::vector<int>& out) const {
    out.clear();
    int lo[4], hi[4];
    for (int a = 0; a < dim_; ++a) {
      lo[a] = static_cast<int>(std::floor((center[a] - radius) / cell_));
      hi[a] = static_cast<int>(std::floor((center[a] + radius) / cell_));
    }
    int idx[4];
    for (int a = 0; a < dim_; ++a) idx[a] = lo[a];
    for (;;) {
      std::uint64_t key = 0;
      for (int a = 0; a < dim_; ++a)
        key = key * 0x100000001B3ULL + static_cast<std::uint64_t>(idx[a] + (1 << 20));
      if (auto it = buckets_.find(key); it != buckets_.end())
        out.insert(out.end(), it->second.begin(), it->second.end());
      int a = 0;
      for (; a < dim_; ++a) {
        if (++idx[a] <= hi[a]) break;
        idx[a] = lo[a];
      }
      if (a == dim_) break;
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::uint64_t key_of(const Eigen::VectorXd& p) const {
    std::uint64_t key = 0;
    for (int a = 0; a < dim_; ++a) {
      const int c = static_cast<int>(std::floor(p[a] / cell_));
      key = key * 0x100000001B3ULL + static_cast<std::uint64_t>(c + (1 << 20));
    }
    return key;
  }

  const Eigen::MatrixXd& points_;
  double cell_;
  int dim_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

// ---------------------------------------------------------------------------
// The three estimators.
// ---------------------------------------------------------------------------

/// (1/(n eps^d)) sum_i K(|iota(x_i) - iota(x)| / eps). May be negative for
/// signed kernels (no clamping). The optional index may only be used with
/// compactly supported kernels; both paths sum in sample order.
inline double kde_isotropic(const SampleSet& s, const IsotropicKernel& k, double eps,
                            const Vec& x, const GridBucketIndex* index = nullptr) {
  if (s.n() == 0) throw std::invalid_argument("kde_isotropic: empty sample set");
  if (!(eps > 0.0)) throw std::invalid_argument("kde_isotropic: eps must be positive");
  const Manifold& m = *s.manifold;
  const Eigen::VectorXd ax = m.embed(x);
  const int d = m.intrinsic_dim();
  double sum = 0.0;
  if (index != nullptr) {
    if (!k.compact_support())
      throw std::invalid_argument("kde_isotropic: bucket index requires compact support");
    static thread_local std::vector<int> hits;
    index->query_ball(Vec(ax), eps * k.rho, hits);
    for (int i : hits) sum += k.profile((s.ambient.col(i) - ax).norm() / eps);
  } else {
    for (int i = 0; i < s.n(); ++i) sum += k.profile((s.ambient.col(i) - ax).norm() / eps);
  }
  return sum / (s.n() * std::pow(eps, d));
}

/// (1/(n eps^d U_x(0))) sum_i K(Phi_x^{-1}(iota(x_i)) / eps); samples outside
/// the chart image contribute exactly zero.
inline double kde_chart(const SampleSet& s, const ChartKernel& k, double eps, const Chart& chart) {
  if (s.n() == 0) throw std::invalid_argument("kde_chart: empty sample set");
  if (!(eps > 0.0)) throw std::invalid_argument("kde_chart: eps must be positive");
  if (chart.radius <= eps * k.support_halfwidth * chart.bilipschitz_bound)
    throw config_error("kde_chart: chart radius too small for the kernel support");
  const int d = s.manifold->intrinsic_dim();
  double sum = 0.0;
  for (int i = 0; i < s.n(); ++i) {
    const auto v = chart.inverse(s.point(i));
    if (!v) continue;
    sum += k.profile(Vec(*v / eps));
  }
  return sum / (s.n() * std::pow(eps, d) * chart.volume_density_at_zero);
}

/// (1/n) sum_i K_eps(iota(x), iota(x_i)).
inline double kde_pair(const SampleSet& s, const PairKernel& k, const Vec& x) {
  if (s.n() == 0) throw std::invalid_argument("kde_pair: empty sample set");
  const Vec ax = s.manifold->embed(x);
  double sum = 0.0;
  for (int i = 0; i < s.n(); ++i) sum += k.evaluate(ax, s.point(i));
  return sum / s.n();
}

// ---------------------------------------------------------------------------
// Exact expectations by quadrature.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_quadrature_resolution(const Manifold& m, const QuadratureGrid& grid,
                                        double support_diameter) {
  // At least 32 nodes across the kernel support.
  const double span = std::min(support_diameter, 2.0 * m.geodesic_diameter());
  if (grid.spacing > span / 32.0)
    throw config_error("expected_kde: quadrature too coarse (need >= 32 nodes across support)");
}

}  // namespace detail

/// E K_n(x) = int (1/eps^d) K(|iota(y) - iota(x)|/eps) P(y) dV(y).
inline double expected_kde_isotropic(const IsotropicKernel& k, double eps, const Vec& x,
                                     const DensityModel& density, const QuadratureGrid& grid) {
  const Manifold& m = *density.manifold;
  detail::check_quadrature_resolution(m, grid, 2.0 * eps * k.rho);
  const Vec ax = m.embed(x);
  const double inv = 1.0 / std::pow(eps, m.intrinsic_dim());
  return grid.integrate([&](const QuadNode& n) {
    return inv * k.profile((n.ambient - ax).norm() / eps) * density.evaluate(n.param);
  });
}

inline double expected_kde_chart(const ChartKernel& k, double eps, const Chart& chart,
                                 const DensityModel& density, const QuadratureGrid& grid) {
  const Manifold& m = *density.manifold;
  detail::check_quadrature_resolution(m, grid, 2.0 * eps * k.support_halfwidth);
  const double inv = 1.0 / (std::pow(eps, m.intrinsic_dim()) * chart.volume_density_at_zero);
  return grid.integrate([&](const QuadNode& n) {
    const auto v = chart.inverse(n.ambient);
    if (!v) return 0.0;
    return inv * k.profile(Vec(*v / eps)) * density.evaluate(n.param);
  });
}

inline double expected_kde_pair(const PairKernel& k, const Vec& x, const DensityModel& density,
                                const QuadratureGrid& grid) {
  const Manifold& m = *density.manifold;
  detail::check_quadrature_resolution(m, grid, 2.0 * k.eps);
  const Vec ax = m.embed(x);
  return grid.integrate(
      [&](const QuadNode& n) { return k.evaluate(ax, n.ambient) * density.evaluate(n.param); });
}

}  // namespace manikde
