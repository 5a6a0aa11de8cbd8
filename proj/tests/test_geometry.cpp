#include <catch2/catch_amalgamated.hpp>

#include "manikde/fat_cantor.hpp"
#include "manikde/geometry.hpp"
#include "manikde/rng.hpp"

using namespace manikde;

namespace {

Vec random_point(const Manifold& m, CounterRng& rng) { return m.propose_uniform(rng); }

}  // namespace

TEST_CASE("embedding basics") {
  Sphere s2(2);
  const Vec np = vec3(0, 0, 1);
  REQUIRE_THAT(s2.embed(np)[2], Catch::Matchers::WithinAbs(1.0, 1e-15));

  Circle c;
  const Vec west = c.embed(vec1(kPi));
  REQUIRE_THAT(west[0], Catch::Matchers::WithinAbs(-1.0, 1e-12));
  REQUIRE_THAT(west[1], Catch::Matchers::WithinAbs(0.0, 1e-12));

  FatCantorCurve fc({8, 0.05});
  // Retained parameters sit at radius exactly 1 (f vanishes there).
  for (double theta : {0.0, 0.5 * kPi, 0.25 * kPi * 0.5}) {
    if (!fc.in_retained_set(theta)) continue;
    REQUIRE_THAT(fc.embed(vec1(theta)).norm(), Catch::Matchers::WithinAbs(1.0, 1e-15));
  }
  REQUIRE(s2.embed(np).norm() <= 1.0 + 1e-12);
  REQUIRE_THROWS_AS(s2.embed(vec3(0, 0, 2)), std::domain_error);
}

TEST_CASE("ambient distances") {
  Sphere s2(2);
  CounterRng rng(1, 0);
  const Vec x = s2.propose_uniform(rng);
  REQUIRE(s2.ambient_distance(x, x) == 0.0);

  Circle c;
  REQUIRE_THAT(c.ambient_distance(vec1(0.0), vec1(kPi)), Catch::Matchers::WithinAbs(2.0, 1e-12));

  // chord = 2 sin(t/2) for geodesic distance t; cross-check the closed form
  // against direct embedding arithmetic at t = pi/2.
  const Vec np = vec3(0, 0, 1);
  const Vec eq = s2.exp_map(np, vec3(kPi / 2, 0, 0));
  const double chord = s2.ambient_distance(np, eq);
  REQUIRE_THAT(chord, Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-12));
  REQUIRE_THAT(chord, Catch::Matchers::WithinAbs(2.0 * std::sin(kPi / 4.0), 1e-12));
}

TEST_CASE("exp and log maps") {
  Sphere s2(2);
  const Vec np = vec3(0, 0, 1);
  REQUIRE(s2.exp_map(np, vec3(0, 0, 0)).isApprox(np, 1e-15));

  const Vec eq = s2.exp_map(np, vec3(kPi / 2, 0, 0));
  REQUIRE_THAT(eq[2], Catch::Matchers::WithinAbs(0.0, 1e-12));

  // |exp_x^{-1}(y)| = arccos(1 - |ix - iy|^2 / 2); at chord sqrt(2) -> pi/2.
  const double chord = s2.ambient_distance(np, eq);
  const double len = s2.log_map(np, eq).norm();
  REQUIRE_THAT(len, Catch::Matchers::WithinAbs(std::acos(1.0 - chord * chord / 2.0), 1e-12));
  REQUIRE_THAT(len, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-12));

  REQUIRE_THROWS_AS(s2.exp_map(np, vec3(2 * kPi, 0, 0)), std::domain_error);
  REQUIRE_THROWS_AS(s2.log_map(np, vec3(0, 0, -1)), std::domain_error);
}

TEST_CASE("exp/log round trips on all manifolds") {
  CounterRng rng(7, 1);
  const auto check = [&](const Manifold& m) {
    double worst = 0.0;
    int tried = 0;
    for (int i = 0; i < 2000 && tried < 1000; ++i) {
      const Vec a = m.propose_uniform(rng);
      const Vec b = m.propose_uniform(rng);
      if (m.geodesic_distance(a, b) >= 0.95 * m.injectivity_radius()) continue;
      ++tried;
      const Vec v = m.log_map(a, b);
      worst = std::max(worst, m.geodesic_distance(m.exp_map(a, v), b));
      // chord <= arc, equality only at coincident points
      REQUIRE(m.ambient_distance(a, b) <= m.geodesic_distance(a, b) + 1e-12);
    }
    REQUIRE(tried >= 500);
    REQUIRE(worst < 1e-9);
  };
  check(Sphere(2));
  check(Sphere(3));
  check(Circle());
  check(FlatTorus(2));
  check(FatCantorCurve({6, 0.05}));
}

TEST_CASE("volume density in normal coordinates") {
  Sphere s2(2);
  const Vec np = vec3(0, 0, 1);
  REQUIRE(s2.volume_density(np, vec3(0, 0, 0)) == 1.0);
  REQUIRE_THAT(s2.volume_density(np, vec3(kPi / 2, 0, 0)),
               Catch::Matchers::WithinAbs(2.0 / kPi, 1e-12));

  // Small-radius expansion 1 - Ric t^2/6 with Ric = d - 1 = 1 on S^2.
  for (double t : {0.02, 0.05, 0.1}) {
    const double u = s2.volume_density(np, vec3(t, 0, 0));
    REQUIRE_THAT(u, Catch::Matchers::WithinAbs(1.0 - t * t / 6.0, t * t * t * t));
  }
  Circle c;
  REQUIRE(c.volume_density(vec1(0.3), vec1(0.2)) == 1.0);
}

TEST_CASE("chord ratio diagnostic") {
  Sphere s2(2);
  const Vec np = vec3(0, 0, 1);
  const Vec dir = vec3(1, 0, 0);
  REQUIRE(chord_ratio_check(s2, np, dir, 1e-4) < 1e-10);
  REQUIRE(chord_ratio_check(s2, np, dir, 0.1) < 1e-6);

  Circle c;
  REQUIRE(chord_ratio_check(c, vec1(1.0), vec1(1.0), 0.2) < 1e-5);
}

TEST_CASE("quadrature grids") {
  Circle c;
  const auto g = c.quadrature_grid(100);
  REQUIRE(g.nodes.size() == 100);
  for (const auto& n : g.nodes)
    REQUIRE_THAT(n.weight, Catch::Matchers::WithinAbs(2.0 * kPi / 100, 1e-12));

  Sphere s2(2);
  REQUIRE_THAT(s2.quadrature_grid(64).total_weight(),
               Catch::Matchers::WithinAbs(4.0 * kPi, 1e-5));
  Sphere s3(3);
  REQUIRE_THAT(s3.quadrature_grid(24).total_weight(),
               Catch::Matchers::WithinAbs(2.0 * kPi * kPi, 1e-5));
  FlatTorus t2(2);
  REQUIRE_THAT(t2.quadrature_grid(32).total_weight(),
               Catch::Matchers::WithinAbs(sq(2.0 * kPi), 1e-9));

  // Fat-Cantor arclength: quadrature total against an independent
  // high-resolution trapezoid sum of |gamma'|.
  FatCantorCurve fc({8, 0.05});
  const int n = 1 << 18;
  double trap = 0.0;
  double prev = fc.speed(0.0);
  for (int i = 1; i <= n; ++i) {
    const double sp = fc.speed(2.0 * kPi * i / n);
    trap += 0.5 * (prev + sp) * (2.0 * kPi / n);
    prev = sp;
  }
  REQUIRE_THAT(fc.quadrature_grid(4096).total_weight(),
               Catch::Matchers::WithinRel(trap, 1e-6));
  REQUIRE_THAT(fc.quadrature_grid(64).total_weight(),
               Catch::Matchers::WithinRel(fc.volume(), 1e-6));
  for (const auto& node : fc.quadrature_grid(64).nodes) REQUIRE(node.weight > 0.0);
}

TEST_CASE("quadrature refinement improves for smooth integrands") {
  // Peaked smooth integrands keep the error visible above rounding.
  Circle c;
  auto f_circle = [](const QuadNode& n) { return 1.0 / (1.02 - n.ambient[0]); };
  const double ref = c.quadrature_grid(1 << 15).integrate(f_circle);
  const double e1 = std::abs(c.quadrature_grid(48).integrate(f_circle) - ref);
  const double e2 = std::abs(c.quadrature_grid(96).integrate(f_circle) - ref);
  REQUIRE(e1 >= 2.0 * e2);

  Sphere s2(2);
  auto f_sphere = [](const QuadNode& n) { return std::exp(2.0 * n.ambient[2]); };
  const double refs = s2.quadrature_grid(1024).integrate(f_sphere);
  const double s1 = std::abs(s2.quadrature_grid(16).integrate(f_sphere) - refs);
  const double s2e = std::abs(s2.quadrature_grid(32).integrate(f_sphere) - refs);
  REQUIRE(s1 >= 2.0 * s2e);
}

TEST_CASE("charts") {
  Sphere s2(2);
  CounterRng rng(11, 3);
  const Vec x = s2.propose_uniform(rng);
  const Chart chart = s2.build_chart(x, 1.0);
  REQUIRE(chart.volume_density_at_zero == 1.0);
  REQUIRE(chart.forward(vec2(0, 0)).isApprox(s2.embed(x), 1e-12));

  // inverse(forward(v)) = v and the bi-Lipschitz bound D_1 on sampled pairs
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    Vec v = vec2(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
    if (v.norm() >= 1.0) continue;
    const auto back = chart.inverse(chart.forward(v));
    REQUIRE(back.has_value());
    worst = std::max(worst, (Vec(*back) - v).norm());
  }
  REQUIRE(worst < 1e-9);

  for (int i = 0; i < 200; ++i) {
    Vec v1 = vec2(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
    Vec v2 = vec2(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
    if (v1.norm() >= 1.0 || v2.norm() >= 1.0) continue;
    const double dv = (v1 - v2).norm();
    const double dg = s2.geodesic_distance(Vec(chart.forward(v1)), Vec(chart.forward(v2)));
    // forward() lands on the sphere, so params equal ambient coordinates
    REQUIRE(dg <= chart.bilipschitz_bound * dv + 1e-12);
    REQUIRE(dg >= dv / chart.bilipschitz_bound - 1e-12);
  }

  // D_2 consistency: |U(v)/U(0) - 1| <= D_2 |v| on a radial grid, and D_2
  // matches max |(sin t / t) - 1| / t over t <= 1 for S^2.
  double d2_oracle = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double t = 1.0 * i / 2000;
    d2_oracle = std::max(d2_oracle, std::abs(std::sin(t) / t - 1.0) / t);
  }
  REQUIRE_THAT(chart.volume_lip_bound, Catch::Matchers::WithinRel(d2_oracle, 1e-3));
  for (int i = 1; i <= 50; ++i) {
    const double t = 1.0 * i / 50;
    REQUIRE(std::abs(chart.density(vec2(t, 0)) - 1.0) <= chart.volume_lip_bound * t + 1e-12);
  }

  Circle c;
  const Chart cc = c.build_chart(vec1(0.4), 1.0);
  REQUIRE(cc.bilipschitz_bound == 1.0);  // arclength chart is an isometry
  REQUIRE(cc.volume_lip_bound == 0.0);
  const auto back = cc.inverse(c.embed(vec1(0.9)));
  REQUIRE(back.has_value());
  REQUIRE_THAT((*back)[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_FALSE(cc.inverse(c.embed(vec1(0.4 + 2.0))).has_value());

  REQUIRE_THROWS_AS(s2.build_chart(x, 4.0), std::domain_error);
}

TEST_CASE("fat cantor construction") {
  FatCantorParams params{8, 0.05};
  FatCantorCurve fc(params);

  // Retained measure is exact from the schedule.
  double removed = 0.0;
  for (int k = 1; k <= params.depth; ++k) removed += std::pow(2.0, k - 1) * std::pow(4.0, -k);
  REQUIRE_THAT(fc.retained_measure(), Catch::Matchers::WithinRel(0.5 * kPi * (1 - removed), 1e-15));
  REQUIRE(fc.retained_measure() > 0.0);

  // f = 0 exactly on the retained set, > 0 at removed midpoints.
  CounterRng rng(3, 9);
  int retained_hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const double theta = rng.uniform() * 0.5 * kPi;
    if (fc.in_retained_set(theta)) {
      ++retained_hits;
      REQUIRE(fc.bump(theta) == 0.0);
    }
  }
  REQUIRE(retained_hits > 500);
  for (const auto& iv : fc.removed_intervals()) {
    REQUIRE(fc.bump(0.5 * (iv.a + iv.b)) > 0.0);
  }

  // Smooth closure: gamma(0) = gamma(2pi) with matching finite-difference
  // derivatives.
  REQUIRE((fc.curve(0.0) - fc.curve(2.0 * kPi)).norm() < 1e-12);
  const double h = 1e-7;
  const Vec d_lo = (fc.curve(h) - fc.curve(0.0)) / h;
  const Vec d_hi = (fc.curve(2.0 * kPi) - fc.curve(2.0 * kPi - h)) / h;
  REQUIRE((d_lo - d_hi).norm() < 1e-6);
  const Vec dlo_exact = fc.curve_deriv(0.0);
  REQUIRE((d_lo - dlo_exact).norm() < 1e-4);

  // The closing arc passes through the origin and stays inside the disc
  // (radius indistinguishable from 1 at the flat junction fringes).
  REQUIRE(fc.curve(kPi).norm() < 1e-12);
  for (int i = 1; i < 400; ++i) {
    const double theta = 0.5 * kPi + (1.5 * kPi) * i / 400.0;
    REQUIRE(fc.curve(theta).norm() <= 1.0);
    if (theta > 0.5 * kPi + 0.2 && theta < 2.0 * kPi - 0.2)
      REQUIRE(fc.curve(theta).norm() < 1.0 - 1e-9);
  }
  // Outer arc stays at radius >= 1.
  for (int i = 0; i <= 400; ++i) {
    const double theta = 0.5 * kPi * i / 400.0;
    REQUIRE(fc.curve(theta).norm() >= 1.0 - 1e-15);
  }
}

TEST_CASE("fat cantor analytic derivative matches finite differences") {
  FatCantorCurve fc({6, 0.05});
  CounterRng rng(5, 2);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double theta = rng.uniform() * 2.0 * kPi;
    if (theta < 2 * h || theta > 2 * kPi - 2 * h) continue;
    const Vec fd = (fc.curve(theta + h) - fc.curve(theta - h)) / (2.0 * h);
    REQUIRE((fd - fc.curve_deriv(theta)).norm() < 1e-5);
  }
}
