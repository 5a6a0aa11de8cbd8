#pragma once

#include <memory>
#include <string>

#include "manikde/fat_cantor.hpp"
#include "manikde/geometry.hpp"

namespace manikde {

/// Probability density on a manifold with optional Hoelder metadata.
struct DensityModel {
  std::string name;
  std::shared_ptr<const Manifold> manifold;
  std::function<double(const Vec&)> evaluate;  // param -> density value
  double p_max = 0.0;
  bool has_holder = false;
  double holder_c = 0.0;      // C_P
  double holder_kappa = 1.0;  // kappa in (0, 1]
  double normalization_witness = 0.0;
};

/// Reference quadrature resolution used for density normalization witnesses.
inline int reference_resolution(const Manifold& m) {
  switch (m.kind()) {
    case ManifoldKind::Circle:
    case ManifoldKind::FatCantorCurve:
      return 8192;
    case ManifoldKind::Sphere:
      return m.intrinsic_dim() == 3 ? 48 : 256;
    case ManifoldKind::ProductOfCircles:
      return m.intrinsic_dim() == 3 ? 48 : (m.intrinsic_dim() == 2 ? 256 : 8192);
  }
  return 256;
}

/// Default anchor point x_0 used by the Hoelder density family.
inline Vec default_anchor(const Manifold& m) {
  switch (m.kind()) {
    case ManifoldKind::Circle:
    case ManifoldKind::FatCantorCurve:
      return vec1(0.0);
    case ManifoldKind::Sphere: {
      Vec x(m.ambient_dim());
      x.setZero();
      x[m.ambient_dim() - 1] = 1.0;
      return x;
    }
    case ManifoldKind::ProductOfCircles: {
      Vec x(m.intrinsic_dim());
      x.setZero();
      return x;
    }
  }
  return vec1(0.0);
}

inline DensityModel uniform_density(std::shared_ptr<const Manifold> m) {
  DensityModel d;
  d.name = "uniform";
  d.manifold = m;
  const double v = 1.0 / m->volume();
  d.evaluate = [v](const Vec&) { return v; };
  d.p_max = v;
  d.has_holder = true;
  d.holder_c = 0.0;
  d.holder_kappa = 1.0;
  d.normalization_witness = 1.0;
  return d;
}

/// P(x) = Z^{-1} (1 + strength * d_g(x, x0)^kappa). The map t -> t^kappa is
/// kappa-Hoelder with constant 1 and d_g(., x0) is 1-Lipschitz, so
/// C_P = |strength| / Z.
inline DensityModel holder_density(std::shared_ptr<const Manifold> m, double kappa,
                                   double strength) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("holder_density: kappa must be in (0, 1]");
  const double diam = m->geodesic_diameter();
  if (1.0 + strength * std::pow(diam, kappa) <= 0.0)
    throw std::invalid_argument("holder_density: strength makes the density nonpositive");

  const Vec x0 = default_anchor(*m);
  const Manifold* mp = m.get();
  auto raw = [mp, x0, kappa, strength](const Vec& x) {
    return 1.0 + strength * std::pow(mp->geodesic_distance(x, x0), kappa);
  };
  const QuadratureGrid ref = m->quadrature_grid(reference_resolution(*m));
  const double z = ref.integrate([&](const QuadNode& n) { return raw(n.param); });

  DensityModel d;
  d.name = "holder";
  d.manifold = m;
  d.evaluate = [raw, z](const Vec& x) { return raw(x) / z; };
  d.p_max = std::max(1.0, 1.0 + strength * std::pow(diam, kappa)) / z;
  d.has_holder = true;
  d.holder_c = std::abs(strength) / z;
  d.holder_kappa = kappa;
  d.normalization_witness = ref.integrate([&](const QuadNode& n) { return d.evaluate(n.param); });
  return d;
}

/// Bounded discontinuous density on a curve: P proportional to
/// 1 + jump * chi_{theta in [0, pi)}. No Hoelder metadata.
inline DensityModel piecewise_density(std::shared_ptr<const Manifold> m, double jump) {
  if (m->intrinsic_dim() != 1)
    throw config_error("piecewise_density: curve manifolds only");
  if (jump <= -1.0) throw std::invalid_argument("piecewise_density: jump must exceed -1");
  auto raw = [jump](const Vec& x) {
    const double th = detail::wrap_angle(x[0]);
    return th < kPi ? 1.0 + jump : 1.0;
  };
  const QuadratureGrid ref = m->quadrature_grid(reference_resolution(*m));
  const double z = ref.integrate([&](const QuadNode& n) { return raw(n.param); });

  DensityModel d;
  d.name = "piecewise";
  d.manifold = m;
  d.evaluate = [raw, z](const Vec& x) { return raw(x) / z; };
  d.p_max = std::max(1.0, 1.0 + jump) / z;
  d.has_holder = false;
  d.normalization_witness = ref.integrate([&](const QuadNode& n) { return d.evaluate(n.param); });
  return d;
}

}  // namespace manikde
