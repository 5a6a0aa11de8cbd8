#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "manikde/common.hpp"
#include "manikde/rng.hpp"

namespace manikde {

enum class ManifoldKind { Sphere, Circle, FatCantorCurve, ProductOfCircles };

struct QuadNode {
  Vec param;
  Vec ambient;
  double weight;
};

struct QuadratureGrid {
  std::vector<QuadNode> nodes;
  double spacing = 0.0;  // typical geodesic gap between neighboring nodes

  double total_weight() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
  }

  template <typename Fn>
  double integrate(Fn&& f) const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight * f(n);
    return s;
  }
};

/// Local diffeomorphism v in B_r(0) <-> neighborhood of `center` on the
/// embedded manifold, with bi-Lipschitz and volume-density bounds.
struct Chart {
  Vec center;
  double radius = 0.0;
  std::function<Vec(const Vec&)> forward;                  // R^d -> R^p on iota(M)
  std::function<std::optional<Vec>(const Vec&)> inverse;   // R^p on iota(M) -> R^d
  std::function<double(const Vec&)> density;               // U_x(v)
  double volume_density_at_zero = 1.0;                     // U_x(0)
  double bilipschitz_bound = 1.0;                          // D_1
  double volume_lip_bound = 0.0;                           // D_2
};

class Manifold {
 public:
  virtual ~Manifold() = default;

  ManifoldKind kind() const { return kind_; }
  int intrinsic_dim() const { return d_; }
  int ambient_dim() const { return p_; }
  double volume() const { return volume_; }
  double injectivity_radius() const { return inj_; }
  /// Largest geodesic distance between two points.
  double geodesic_diameter() const { return diameter_; }
  const std::string& descriptor() const { return descriptor_; }

  virtual Vec embed(const Vec& x) const = 0;
  virtual double geodesic_distance(const Vec& x, const Vec& y) const = 0;
  /// Tangent vectors: ambient p-vector orthogonal to x for the sphere,
  /// intrinsic offsets (angles / signed arclength) for circles and curves.
  virtual Vec exp_map(const Vec& x, const Vec& v) const = 0;
  virtual Vec log_map(const Vec& x, const Vec& y) const = 0;
  /// U_x(v): volume density in normal coordinates at radius |v|.
  virtual double volume_density(const Vec& x, const Vec& v) const = 0;
  virtual QuadratureGrid quadrature_grid(int resolution) const = 0;
  /// Typical geodesic spacing between neighboring quadrature nodes.
  virtual double node_spacing(int resolution) const = 0;
  virtual Vec propose_uniform(CounterRng& rng) const = 0;
  virtual Chart build_chart(const Vec& x, double r) const = 0;
  /// ||II(theta, theta)|| for a unit tangent direction.
  virtual double second_fundamental_norm(const Vec& x, const Vec& dir) const = 0;

  double ambient_distance(const Vec& x, const Vec& y) const {
    return (embed(x) - embed(y)).norm();
  }

 protected:
  Manifold(ManifoldKind kind, int d, int p, double volume, double inj, double diameter,
           std::string descriptor)
      : kind_(kind), d_(d), p_(p), volume_(volume), inj_(inj), diameter_(diameter),
        descriptor_(std::move(descriptor)) {}

  ManifoldKind kind_;
  int d_;
  int p_;
  double volume_;
  double inj_;
  double diameter_;
  std::string descriptor_;
};

/// Residual of the chord/arc expansion |iota(exp_x(t u)) - iota(x)|/t
/// against 1 - ||II(u,u)||^2 t^2 / 24.
inline double chord_ratio_check(const Manifold& m, const Vec& x, const Vec& dir, double t) {
  Vec u = dir / dir.norm();
  const double chord = (m.embed(m.exp_map(x, Vec(t * u))) - m.embed(x)).norm();
  const double ii = m.second_fundamental_norm(x, u);
  return std::abs(chord / t - (1.0 - ii * ii * t * t / 24.0));
}

namespace detail {

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0 ? a + 2.0 * kPi : a;
}

/// Signed difference b - a wrapped into (-pi, pi].
inline double wrap_signed(double a, double b) {
  double d = std::fmod(b - a, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

// 5-point Gauss-Legendre on [-1, 1].
inline constexpr double kGauss5X[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                       0.5384693101056831, 0.9061798459386640};
inline constexpr double kGauss5W[5] = {0.2369268850561891, 0.4786286704993665,
                                       0.5688888888888889, 0.4786286704993665,
                                       0.2369268850561891};

template <typename Fn>
double gauss5(Fn&& f, double a, double b) {
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += kGauss5W[i] * f(m + h * kGauss5X[i]);
  return s * h;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sphere S^d in R^{d+1}, parametrized by its ambient unit vector.
// ---------------------------------------------------------------------------

class Sphere : public Manifold {
 public:
  explicit Sphere(int d)
      : Manifold(ManifoldKind::Sphere, d, d + 1, sphere_area(d), kPi, kPi,
                 "sphere:d=" + std::to_string(d)) {
    if (d < 1 || d > 3) throw config_error("sphere: intrinsic dimension must be 1..3");
  }

  /// Surface area |S^d|.
  static double sphere_area(int d) {
    switch (d) {
      case 0: return 2.0;
      case 1: return 2.0 * kPi;
      case 2: return 4.0 * kPi;
      case 3: return 2.0 * kPi * kPi;
      default: {
        return 2.0 * kPi * sphere_area(d - 2) / (d - 1);
      }
    }
  }

  Vec embed(const Vec& x) const override {
    check_point(x);
    return x;
  }

  double geodesic_distance(const Vec& x, const Vec& y) const override {
    const double c = std::clamp(x.dot(y), -1.0, 1.0);
    // acos is ill-conditioned near 1; the chord formula is stable there.
    if (c > 0.5) return 2.0 * std::asin(std::min(1.0, 0.5 * (x - y).norm()));
    return std::acos(c);
  }

  Vec exp_map(const Vec& x, const Vec& v) const override {
    const double t = v.norm();
    if (t >= inj_) throw std::domain_error("exp_map: |v| exceeds injectivity radius");
    if (t == 0.0) return x;
    if (std::abs(x.dot(v)) > 1e-8 * t)
      throw std::domain_error("exp_map: tangent vector not orthogonal to base point");
    Vec y = std::cos(t) * x + (std::sin(t) / t) * v;
    y /= y.norm();
    return y;
  }

  Vec log_map(const Vec& x, const Vec& y) const override {
    const double theta = geodesic_distance(x, y);
    if (theta >= inj_) throw std::domain_error("log_map: points too far apart");
    Vec perp = y - x.dot(y) * x;
    const double pn = perp.norm();
    if (pn < 1e-300 || theta == 0.0) return Vec(Vec::Zero(p_));
    return Vec((theta / pn) * perp);
  }

  double volume_density(const Vec&, const Vec& v) const override {
    const double t = v.norm();
    if (t >= inj_) throw std::domain_error("volume_density: |v| exceeds injectivity radius");
    if (t < 1e-8) return 1.0 - (d_ - 1) * t * t / 6.0;
    return std::pow(std::sin(t) / t, d_ - 1);
  }

  QuadratureGrid quadrature_grid(int resolution) const override {
    if (resolution < 8) throw config_error("quadrature_grid: resolution must be >= 8");
    QuadratureGrid g;
    g.spacing = node_spacing(resolution);
    if (d_ == 1) {
      const int n = resolution;
      const double w = 2.0 * kPi / n;
      g.nodes.reserve(n);
      for (int i = 0; i < n; ++i) {
        const double a = (i + 0.5) * w;
        QuadNode node{vec2(std::cos(a), std::sin(a)), Vec(), w};
        node.ambient = node.param;
        g.nodes.push_back(std::move(node));
      }
    } else if (d_ == 2) {
      // Cells equal-area in (z, phi); Archimedes makes the weights exact.
      const int nz = resolution, np = 2 * resolution;
      const double dz = 2.0 / nz, dp = 2.0 * kPi / np;
      g.nodes.reserve(static_cast<std::size_t>(nz) * np);
      for (int i = 0; i < nz; ++i) {
        const double z = -1.0 + (i + 0.5) * dz;
        const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int j = 0; j < np; ++j) {
          const double phi = (j + 0.5) * dp;
          QuadNode node{vec3(rxy * std::cos(phi), rxy * std::sin(phi), z), Vec(), dz * dp};
          node.ambient = node.param;
          g.nodes.push_back(std::move(node));
        }
      }
    } else {
      // S^3: psi, phi cells carry their exact marginal integrals.
      const int n1 = resolution, n2 = resolution, n3 = 2 * resolution;
      const double d1 = kPi / n1, d2 = kPi / n2, d3 = 2.0 * kPi / n3;
      auto w_psi = [](double a, double b) {
        return 0.5 * (b - a) - 0.25 * (std::sin(2.0 * b) - std::sin(2.0 * a));
      };
      g.nodes.reserve(static_cast<std::size_t>(n1) * n2 * n3);
      for (int i = 0; i < n1; ++i) {
        const double psi = (i + 0.5) * d1;
        const double wi = w_psi(i * d1, (i + 1) * d1);
        for (int j = 0; j < n2; ++j) {
          const double phi = (j + 0.5) * d2;
          const double wj = std::cos(j * d2) - std::cos((j + 1) * d2);
          for (int k = 0; k < n3; ++k) {
            const double th = (k + 0.5) * d3;
            Vec x(4);
            x << std::cos(psi), std::sin(psi) * std::cos(phi),
                std::sin(psi) * std::sin(phi) * std::cos(th),
                std::sin(psi) * std::sin(phi) * std::sin(th);
            QuadNode node{x, x, wi * wj * d3};
            g.nodes.push_back(std::move(node));
          }
        }
      }
    }
    return g;
  }

  double node_spacing(int resolution) const override { return kPi / resolution; }

  Vec propose_uniform(CounterRng& rng) const override {
    Vec x(p_);
    double n2 = 0.0;
    do {
      for (int i = 0; i < p_; ++i) x[i] = rng.normal();
      n2 = x.squaredNorm();
    } while (n2 < 1e-12);
    return Vec(x / std::sqrt(n2));
  }

  Chart build_chart(const Vec& x, double r) const override {
    check_point(x);
    if (r >= inj_) throw std::domain_error("build_chart: radius exceeds injectivity radius");
    Eigen::MatrixXd basis = tangent_basis(x);
    Chart c;
    c.center = x;
    c.radius = r;
    const int d = d_;
    Vec center = x;
    auto to_ambient = [basis](const Vec& vd) {
      return Vec(basis * Eigen::VectorXd(vd));
    };
    const Sphere* self = this;
    c.forward = [self, center, to_ambient](const Vec& vd) {
      return self->embed(self->exp_map(center, to_ambient(vd)));
    };
    c.inverse = [self, center, basis, r, d](const Vec& u) -> std::optional<Vec> {
      const double theta = self->geodesic_distance(center, u);
      if (theta >= r) return std::nullopt;
      Vec vamb = self->log_map(center, u);
      Vec vd(d);
      for (int i = 0; i < d; ++i) vd[i] = basis.col(i).dot(vamb);
      return vd;
    };
    c.density = [self, center](const Vec& vd) { return self->volume_density(center, vd); };
    c.volume_density_at_zero = 1.0;
    c.bilipschitz_bound = r / std::sin(std::min(r, kPi - 1e-9));
    c.volume_lip_bound = volume_lip_bound(r);
    return c;
  }

  /// Smallest D_2 with |U(t) - 1| <= D_2 t on (0, r], scanned on a fine grid.
  double volume_lip_bound(double r) const {
    double best = 0.0;
    const int n = 4096;
    for (int i = 1; i <= n; ++i) {
      const double t = r * i / n;
      const double u = std::pow(std::sin(t) / t, d_ - 1);
      best = std::max(best, std::abs(u - 1.0) / t);
    }
    return best * 1.0000001;
  }

  double second_fundamental_norm(const Vec&, const Vec&) const override { return 1.0; }

 private:
  void check_point(const Vec& x) const {
    if (x.size() != p_ || std::abs(x.norm() - 1.0) > 1e-8)
      throw std::domain_error("sphere: parameter must be a unit vector in R^{d+1}");
  }

  Eigen::MatrixXd tangent_basis(const Vec& x) const {
    // Gram-Schmidt of the canonical basis against x.
    Eigen::MatrixXd b(p_, d_);
    int col = 0;
    for (int i = 0; i < p_ && col < d_; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(p_);
      e[i] = 1.0;
      e -= x.dot(e) * Eigen::VectorXd(x);
      for (int j = 0; j < col; ++j) e -= b.col(j).dot(e) * b.col(j);
      const double n = e.norm();
      if (n > 1e-6) b.col(col++) = e / n;
    }
    return b;
  }
};

// ---------------------------------------------------------------------------
// Closed curves in R^2 parametrized by theta in [0, 2pi).
// ---------------------------------------------------------------------------

class CurveManifold : public Manifold {
 public:
  /// gamma(theta) in R^2.
  virtual Vec curve(double theta) const = 0;
  /// gamma'(theta).
  virtual Vec curve_deriv(double theta) const = 0;

  double speed(double theta) const { return curve_deriv(theta).norm(); }

  /// Cumulative arclength from 0 to theta (theta in [0, 2pi]).
  double arclength_to(double theta) const {
    ensure_table();
    const double step = 2.0 * kPi / table_n_;
    const int k = std::min<int>(static_cast<int>(theta / step), table_n_ - 1);
    double s = cumlen_[k];
    s += detail::gauss5([this](double t) { return speed(t); }, k * step, theta);
    return s;
  }

  double total_arclength() const {
    ensure_table();
    return cumlen_[table_n_];
  }

  /// Inverse of arclength_to: s in [0, L) -> theta. The solution is bracketed
  /// by the table cell containing s, so the safeguarded Newton iteration never
  /// crosses the wrap seam.
  double param_at_arclength(double s) const {
    ensure_table();
    const double total = cumlen_[table_n_];
    s = std::fmod(s, total);
    if (s < 0) s += total;
    const auto it = std::upper_bound(cumlen_.begin(), cumlen_.end(), s);
    const int k =
        std::min<int>(table_n_ - 1, std::max<int>(0, static_cast<int>(it - cumlen_.begin()) - 1));
    const double step = 2.0 * kPi / table_n_;
    double lo = k * step, hi = (k + 1) * step;
    double theta = lo + (s - cumlen_[k]) / std::max(speed(lo), 1e-12);
    theta = std::clamp(theta, lo, hi);
    for (int i = 0; i < 80; ++i) {
      const double f = arclength_to(theta) - s;
      if (std::abs(f) < 1e-15 * std::max(1.0, total)) break;
      if (f > 0)
        hi = theta;
      else
        lo = theta;
      double next = theta - f / std::max(speed(theta), 1e-12);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == theta) break;
      theta = next;
    }
    return detail::wrap_angle(theta);
  }

  Vec embed(const Vec& x) const override {
    check_param(x);
    return curve(detail::wrap_angle(x[0]));
  }

  double geodesic_distance(const Vec& x, const Vec& y) const override {
    const double sx = arclength_to(detail::wrap_angle(x[0]));
    const double sy = arclength_to(detail::wrap_angle(y[0]));
    const double total = total_arclength();
    const double d = std::abs(sx - sy);
    return std::min(d, total - d);
  }

  Vec exp_map(const Vec& x, const Vec& v) const override {
    check_param(x);
    if (v.size() != 1) throw std::domain_error("exp_map: tangent must be 1-dimensional");
    if (std::abs(v[0]) >= inj_) throw std::domain_error("exp_map: |v| exceeds injectivity radius");
    const double s = arclength_to(detail::wrap_angle(x[0])) + v[0];
    return vec1(param_at_arclength(s));
  }

  Vec log_map(const Vec& x, const Vec& y) const override {
    const double total = total_arclength();
    double ds = arclength_to(detail::wrap_angle(y[0])) - arclength_to(detail::wrap_angle(x[0]));
    if (ds > 0.5 * total) ds -= total;
    if (ds < -0.5 * total) ds += total;
    if (std::abs(ds) >= inj_) throw std::domain_error("log_map: points too far apart");
    return vec1(ds);
  }

  double volume_density(const Vec&, const Vec& v) const override {
    if (std::abs(v[0]) >= inj_) throw std::domain_error("volume_density: radius violation");
    return 1.0;  // arclength normal coordinates
  }

  QuadratureGrid quadrature_grid(int resolution) const override {
    if (resolution < 8) throw config_error("quadrature_grid: resolution must be >= 8");
    QuadratureGrid g;
    g.spacing = node_spacing(resolution);
    g.nodes.reserve(resolution);
    const double step = 2.0 * kPi / resolution;
    double prev = 0.0;
    for (int i = 0; i < resolution; ++i) {
      const double hi_edge = (i + 1 < resolution) ? arclength_to((i + 1) * step) : total_arclength();
      const double theta = (i + 0.5) * step;
      QuadNode node{vec1(theta), curve(theta), hi_edge - prev};
      prev = hi_edge;
      g.nodes.push_back(std::move(node));
    }
    return g;
  }

  double node_spacing(int resolution) const override {
    return total_arclength() / resolution;
  }

  Vec propose_uniform(CounterRng& rng) const override {
    return vec1(param_at_arclength(rng.uniform() * total_arclength()));
  }

  Chart build_chart(const Vec& x, double r) const override {
    check_param(x);
    if (r >= inj_) throw std::domain_error("build_chart: radius exceeds injectivity radius");
    Chart c;
    c.center = x;
    c.radius = r;
    const CurveManifold* self = this;
    Vec center = x;
    c.forward = [self, center](const Vec& v) { return self->embed(self->exp_map(center, v)); };
    c.inverse = [self, center, r](const Vec& u) -> std::optional<Vec> {
      auto v = self->invert_near(center, u, r);
      if (!v) return std::nullopt;
      return vec1(*v);
    };
    c.density = [](const Vec&) { return 1.0; };
    c.volume_density_at_zero = 1.0;
    c.bilipschitz_bound = 1.0;
    c.volume_lip_bound = 0.0;
    return c;
  }

  double second_fundamental_norm(const Vec& x, const Vec&) const override {
    // |kappa| from finite differences of the unit tangent w.r.t. arclength.
    const double theta = detail::wrap_angle(x[0]);
    const double h = 1e-5;
    auto unit_tangent = [this](double t) {
      Vec d = curve_deriv(t);
      return Vec(d / d.norm());
    };
    Vec dT = (unit_tangent(theta + h) - unit_tangent(theta - h)) / (2.0 * h);
    return dT.norm() / speed(theta);
  }

 protected:
  CurveManifold(ManifoldKind kind, double volume, double inj, double diameter,
                std::string descriptor)
      : Manifold(kind, 1, 2, volume, inj, diameter, std::move(descriptor)) {}

  void check_param(const Vec& x) const {
    if (x.size() != 1 || !std::isfinite(x[0]))
      throw std::domain_error("curve: parameter must be a finite scalar angle");
  }

  void finalize_lengths() {
    table_n_ = 1 << 14;
    cumlen_.assign(table_n_ + 1, 0.0);
    const double step = 2.0 * kPi / table_n_;
    for (int k = 0; k < table_n_; ++k) {
      cumlen_[k + 1] =
          cumlen_[k] + detail::gauss5([this](double t) { return speed(t); }, k * step, (k + 1) * step);
    }
    volume_ = cumlen_[table_n_];
    inj_ = 0.5 * volume_;
    diameter_ = 0.5 * volume_;
  }

  /// Solve |gamma(theta) - u| minimal near `center` within arclength r.
  std::optional<double> invert_near(const Vec& center, const Vec& u, double r) const {
    const double s0 = arclength_to(detail::wrap_angle(center[0]));
    const int n = 256;
    double best = kInf, best_s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = s0 - r + (2.0 * r) * i / n;
      const double dist = (curve(param_at_arclength(s)) - u).norm();
      if (dist < best) {
        best = dist;
        best_s = s;
      }
    }
    double lo = best_s - 2.0 * r / n, hi = best_s + 2.0 * r / n;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      const double f1 = (curve(param_at_arclength(m1)) - u).squaredNorm();
      const double f2 = (curve(param_at_arclength(m2)) - u).squaredNorm();
      if (f1 < f2)
        hi = m2;
      else
        lo = m1;
      if (hi - lo < 1e-13) break;
    }
    const double s = 0.5 * (lo + hi);
    if ((curve(param_at_arclength(s)) - u).norm() > 1e-6) return std::nullopt;
    double ds = s - s0;
    if (std::abs(ds) >= r) return std::nullopt;
    return ds;
  }

  mutable std::vector<double> cumlen_;
  mutable int table_n_ = 0;

 private:
  void ensure_table() const {
    if (table_n_ == 0)
      throw std::logic_error("curve: arclength table not initialized");
  }
};

class Circle : public CurveManifold {
 public:
  Circle() : CurveManifold(ManifoldKind::Circle, 2.0 * kPi, kPi, kPi, "circle") {
    finalize_lengths();
  }

  Vec curve(double theta) const override { return vec2(std::cos(theta), std::sin(theta)); }

  Vec curve_deriv(double theta) const override {
    return vec2(-std::sin(theta), std::cos(theta));
  }

  // Closed forms; the generic table machinery stays as the cross-check oracle.
  double geodesic_distance(const Vec& x, const Vec& y) const override {
    const double d = std::abs(detail::wrap_signed(x[0], y[0]));
    return d;
  }

  Vec exp_map(const Vec& x, const Vec& v) const override {
    check_param(x);
    if (v.size() != 1) throw std::domain_error("exp_map: tangent must be 1-dimensional");
    if (std::abs(v[0]) >= kPi) throw std::domain_error("exp_map: |v| exceeds injectivity radius");
    return vec1(detail::wrap_angle(x[0] + v[0]));
  }

  Vec log_map(const Vec& x, const Vec& y) const override {
    const double d = detail::wrap_signed(x[0], y[0]);
    if (std::abs(d) >= kPi) throw std::domain_error("log_map: points too far apart");
    return vec1(d);
  }

  Vec propose_uniform(CounterRng& rng) const override {
    return vec1(rng.uniform() * 2.0 * kPi);
  }

  double second_fundamental_norm(const Vec&, const Vec&) const override { return 1.0; }
};

// ---------------------------------------------------------------------------
// Flat torus (S^1)^d embedded in R^{2d} as a product of unit circles.
// ---------------------------------------------------------------------------

class FlatTorus : public Manifold {
 public:
  explicit FlatTorus(int d)
      : Manifold(ManifoldKind::ProductOfCircles, d, 2 * d, std::pow(2.0 * kPi, d), kPi,
                 kPi * std::sqrt(static_cast<double>(d)), "torus:d=" + std::to_string(d)) {
    if (d < 1 || d > 3) throw config_error("torus: intrinsic dimension must be 1..3");
  }

  Vec embed(const Vec& x) const override {
    check_param(x);
    Vec u(p_);
    for (int i = 0; i < d_; ++i) {
      u[2 * i] = std::cos(x[i]);
      u[2 * i + 1] = std::sin(x[i]);
    }
    return u;
  }

  double geodesic_distance(const Vec& x, const Vec& y) const override {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += sq(detail::wrap_signed(x[i], y[i]));
    return std::sqrt(s);
  }

  Vec exp_map(const Vec& x, const Vec& v) const override {
    check_param(x);
    if (v.norm() >= inj_) throw std::domain_error("exp_map: |v| exceeds injectivity radius");
    Vec y(d_);
    for (int i = 0; i < d_; ++i) y[i] = detail::wrap_angle(x[i] + v[i]);
    return y;
  }

  Vec log_map(const Vec& x, const Vec& y) const override {
    Vec v(d_);
    for (int i = 0; i < d_; ++i) v[i] = detail::wrap_signed(x[i], y[i]);
    if (v.norm() >= inj_) throw std::domain_error("log_map: points too far apart");
    return v;
  }

  double volume_density(const Vec&, const Vec& v) const override {
    if (v.norm() >= inj_) throw std::domain_error("volume_density: radius violation");
    return 1.0;
  }

  QuadratureGrid quadrature_grid(int resolution) const override {
    if (resolution < 8) throw config_error("quadrature_grid: resolution must be >= 8");
    QuadratureGrid g;
    g.spacing = node_spacing(resolution);
    const double step = 2.0 * kPi / resolution;
    std::vector<int> idx(d_, 0);
    const std::size_t total = static_cast<std::size_t>(std::pow(resolution, d_));
    g.nodes.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t rem = k;
      Vec x(d_);
      for (int i = 0; i < d_; ++i) {
        x[i] = (static_cast<double>(rem % resolution) + 0.5) * step;
        rem /= resolution;
      }
      QuadNode node{x, embed(x), std::pow(step, d_)};
      g.nodes.push_back(std::move(node));
    }
    return g;
  }

  double node_spacing(int resolution) const override { return 2.0 * kPi / resolution; }

  Vec propose_uniform(CounterRng& rng) const override {
    Vec x(d_);
    for (int i = 0; i < d_; ++i) x[i] = rng.uniform() * 2.0 * kPi;
    return x;
  }

  Chart build_chart(const Vec& x, double r) const override {
    check_param(x);
    if (r >= inj_) throw std::domain_error("build_chart: radius exceeds injectivity radius");
    Chart c;
    c.center = x;
    c.radius = r;
    const FlatTorus* self = this;
    Vec center = x;
    c.forward = [self, center](const Vec& v) { return self->embed(self->exp_map(center, v)); };
    c.inverse = [self, center, r](const Vec& u) -> std::optional<Vec> {
      Vec y(self->d_);
      for (int i = 0; i < self->d_; ++i) y[i] = std::atan2(u[2 * i + 1], u[2 * i]);
      Vec v = self->log_map(center, y);
      if (v.norm() >= r) return std::nullopt;
      return v;
    };
    c.density = [](const Vec&) { return 1.0; };
    c.volume_density_at_zero = 1.0;
    c.bilipschitz_bound = 1.0;
    c.volume_lip_bound = 0.0;
    return c;
  }

  double second_fundamental_norm(const Vec&, const Vec& dir) const override {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += sq(sq(dir[i]));
    return std::sqrt(s);
  }

 private:
  void check_param(const Vec& x) const {
    if (x.size() != d_) throw std::domain_error("torus: parameter must have d angles");
  }
};

}  // namespace manikde
