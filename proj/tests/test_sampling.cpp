#include <catch2/catch_amalgamated.hpp>

#include "manikde/sampling.hpp"

using namespace manikde;

TEST_CASE("uniform densities") {
  auto circle = std::make_shared<Circle>();
  const DensityModel u = uniform_density(circle);
  REQUIRE_THAT(u.evaluate(vec1(1.0)), Catch::Matchers::WithinRel(1.0 / (2.0 * kPi), 1e-15));
  REQUIRE(u.holder_c == 0.0);

  auto s2 = std::make_shared<Sphere>(2);
  REQUIRE_THAT(uniform_density(s2).evaluate(vec3(0, 0, 1)),
               Catch::Matchers::WithinRel(1.0 / (4.0 * kPi), 1e-15));
}

TEST_CASE("holder densities") {
  auto circle = std::make_shared<Circle>();

  // strength 0 degenerates to uniform
  const DensityModel flat = holder_density(circle, 1.0, 0.0);
  REQUIRE_THAT(flat.evaluate(vec1(2.0)), Catch::Matchers::WithinRel(1.0 / (2.0 * kPi), 1e-10));

  // kappa = 1, strength film 0.5: Z = 2 pi + 0.5 * pi^2 via the 1-D integral
  // of the wrapped distance (int min(theta, 2pi - theta) = pi^2).
  const DensityModel lin = holder_density(circle, 1.0, 0.5);
  const double z_expected = 2.0 * kPi + 0.5 * kPi * kPi;
  REQUIRE_THAT(lin.evaluate(vec1(0.0)), Catch::Matchers::WithinRel(1.0 / z_expected, 1e-6));
  REQUIRE_THAT(lin.normalization_witness, Catch::Matchers::WithinAbs(1.0, 1e-4));

  // Hoelder pair check with the declared constant on sampled pairs.
  const DensityModel half = holder_density(circle, 0.5, 0.5);
  CounterRng rng(17, 0);
  for (int i = 0; i < 10000; ++i) {
    const Vec a = circle->propose_uniform(rng);
    const Vec b = circle->propose_uniform(rng);
    const double lhs = std::abs(half.evaluate(a) - half.evaluate(b));
    const double d = circle->geodesic_distance(a, b);
    REQUIRE(lhs <= half.holder_c * std::pow(d, half.holder_kappa) + 1e-12);
    REQUIRE(half.evaluate(a) <= half.p_max + 1e-12);
  }

  REQUIRE_THROWS_AS(holder_density(circle, 1.0, -0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(holder_density(circle, 1.5, 0.1), std::invalid_argument);

  // Sphere variant keeps its witness normalized too.
  auto s2 = std::make_shared<Sphere>(2);
  REQUIRE_THAT(holder_density(s2, 1.0, 0.3).normalization_witness,
               Catch::Matchers::WithinAbs(1.0, 1e-4));
}

TEST_CASE("piecewise density") {
  auto circle = std::make_shared<Circle>();
  const DensityModel d = piecewise_density(circle, 0.5);
  REQUIRE_FALSE(d.has_holder);
  REQUIRE_THAT(d.normalization_witness, Catch::Matchers::WithinAbs(1.0, 1e-4));
  REQUIRE_THAT(d.evaluate(vec1(0.5)) / d.evaluate(vec1(4.0)), Catch::Matchers::WithinRel(1.5, 1e-12));
}

TEST_CASE("sampling determinism and distribution") {
  auto circle = std::make_shared<Circle>();
  const DensityModel u = uniform_density(circle);

  const SampleSet a = sample(u, 2000, 42, 3);
  const SampleSet b = sample(u, 2000, 42, 3);
  REQUIRE(a.params == b.params);  // bit-for-bit
  const SampleSet c = sample(u, 2000, 43, 3);
  REQUIRE(a.params != c.params);

  // Mean resultant length of 1e5 uniform angles is tiny.
  const SampleSet big = sample(u, 100000, 7, 0);
  double sx = 0, sy = 0;
  for (int i = 0; i < big.n(); ++i) {
    sx += big.ambient(0, i);
    sy += big.ambient(1, i);
  }
  REQUIRE(std::hypot(sx, sy) / big.n() < 0.01);
}

TEST_CASE("sampling matches the exact density (chi-square)") {
  auto circle = std::make_shared<Circle>();
  const DensityModel d = holder_density(circle, 1.0, 0.5);
  const SampleSet s = sample(d, 100000, 11, 1);

  const int bins = 50;
  std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
  for (int i = 0; i < s.n(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>(s.params(0, i) / (2.0 * kPi) * bins));
    observed[b] += 1.0;
  }
  const auto grid = circle->quadrature_grid(2000);
  for (const auto& node : grid.nodes) {
    const int b = std::min(bins - 1, static_cast<int>(node.param[0] / (2.0 * kPi) * bins));
    expected[b] += node.weight * d.evaluate(node.param) * s.n();
  }
  double stat = 0.0;
  for (int b = 0; b < bins; ++b) stat += sq(observed[b] - expected[b]) / expected[b];
  REQUIRE(stat < 85.351);  // chi-square 0.999 quantile, 49 dof
}

TEST_CASE("acceptance rate prediction") {
  auto circle = std::make_shared<Circle>();
  const DensityModel d = holder_density(circle, 1.0, 0.5);
  const SampleSet s = sample(d, 20000, 5, 2);
  const double predicted = 1.0 / (d.p_max * circle->volume());
  REQUIRE(std::abs(s.acceptance_rate - predicted) <= 0.1 * predicted);

  // Predicted acceptance below 1e-4 is rejected up front.
  DensityModel degenerate = uniform_density(circle);
  degenerate.p_max = 1e5;
  REQUIRE_THROWS_AS(sample(degenerate, 10, 1, 0), config_error);

  REQUIRE_THROWS_AS(sample(d, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("sampling works on every shipped manifold") {
  CounterRng probe(1, 1);
  for (const std::shared_ptr<const Manifold>& m :
       {std::shared_ptr<const Manifold>(std::make_shared<Sphere>(2)),
        std::shared_ptr<const Manifold>(std::make_shared<FlatTorus>(2)),
        std::shared_ptr<const Manifold>(std::make_shared<FatCantorCurve>(FatCantorParams{6, 0.05}))}) {
    const SampleSet s = sample(uniform_density(m), 500, 9, 4);
    REQUIRE(s.n() == 500);
    for (int i = 0; i < 20; ++i) {
      const Vec p = s.param(i);
      REQUIRE((m->embed(p) - s.point(i)).norm() < 1e-12);
    }
  }
}
