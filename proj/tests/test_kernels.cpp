#include <catch2/catch_amalgamated.hpp>

#include "manikde/geometry.hpp"
#include "manikde/kernels.hpp"
#include "manikde/rng.hpp"

using namespace manikde;

namespace {

// Random interval + random samples inside: every sampled profile value must
// lie within the oracle's [inf, sup].
void check_oscillation_soundness(const IsotropicKernel& k, double t_max, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  for (int trial = 0; trial < 400; ++trial) {
    double t0 = rng.uniform(0.0, t_max);
    double t1 = rng.uniform(0.0, t_max);
    if (t0 > t1) std::swap(t0, t1);
    const Interval bounds = k.oscillation(t0, t1);
    for (int j = 0; j < 25; ++j) {
      const double t = rng.uniform(t0, t1);
      const double v = k.profile(t);
      REQUIRE(v >= bounds.lo - 1e-12);
      REQUIRE(v <= bounds.hi + 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("step kernels") {
  const IsotropicKernel uniform1 = make_uniform_kernel(1.0, 1);
  REQUIRE(uniform1.profile(0.5) == 0.5);
  REQUIRE_THAT(normalization_integral(uniform1, 1), Catch::Matchers::WithinAbs(1.0, 1e-10));

  // d = 2: K = (1/(pi rho^2)) chi_[0,rho]
  const double rho = 1.3;
  const IsotropicKernel uniform2 = make_uniform_kernel(rho, 2);
  REQUIRE_THAT(uniform2.profile(0.2), Catch::Matchers::WithinRel(1.0 / (kPi * rho * rho), 1e-12));
  REQUIRE_THAT(normalization_integral(uniform2, 2), Catch::Matchers::WithinAbs(1.0, 1e-10));

  const IsotropicKernel signed2 = make_step_kernel({{2.0, 0.0, 0.5}, {-1.0, 0.5, 1.0}});
  REQUIRE(signed2.k_sup == 2.0);
  CounterRng rng(3, 3);
  for (int i = 0; i < 1000; ++i) REQUIRE(std::abs(signed2.profile(rng.uniform(0, 1.5))) <= 2.0);

  REQUIRE_THROWS_AS(make_step_kernel({{1.0, 0.5, 0.2}}), std::invalid_argument);
  check_oscillation_soundness(signed2, 1.4, 11);
  check_oscillation_soundness(uniform1, 1.4, 12);
}

TEST_CASE("cantor example kernel") {
  const IsotropicKernel k = make_cantor_example_kernel();
  REQUIRE_THAT(k.profile(0.5), Catch::Matchers::WithinRel(1.0 / 3.0, 1e-15));
  REQUIRE(k.profile(1.0) == 1.0);
  REQUIRE(k.profile(2.0) == 0.25);
  REQUIRE(k.profile(3.0) == 1.0 / 9.0);
  REQUIRE(k.profile(1.7) == 0.0);
  REQUIRE_THAT(k.profile(1.5), Catch::Matchers::WithinRel(1.0 / 3.0, 1e-15));

  // d=1 normalization is exactly 1: 2 * (3/2) * (1/3), null set ignored.
  REQUIRE_THAT(normalization_integral(k, 1), Catch::Matchers::WithinAbs(1.0, 1e-8));

  // Oscillation jumps: 1 - 1/3 = 2/3 around t = 1; 1/k^2 around integers.
  REQUIRE_THAT(k.oscillation(0.9, 1.1).width(), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
  REQUIRE_THAT(k.oscillation(1.9, 2.1).width(), Catch::Matchers::WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(k.oscillation(2.9, 3.1).width(), Catch::Matchers::WithinAbs(1.0 / 9.0, 1e-15));
  REQUIRE(k.oscillation(1.6, 1.9).width() == 0.0);

  // Polynomial decay metadata: |K(t)| t^alpha <= 1 for t >= rho.
  CounterRng rng(5, 1);
  for (int i = 0; i < 10000; ++i) {
    const double t = rng.uniform(1.5, 50.0);
    REQUIRE(std::abs(k.profile(t)) * std::pow(t, k.alpha) <= 1.0 + 1e-12);
  }
  for (double t : {2.0, 3.0, 7.0}) REQUIRE(std::abs(k.profile(t)) * t * t <= 1.0 + 1e-12);
  check_oscillation_soundness(k, 4.0, 13);
}

TEST_CASE("irregular example kernel") {
  const IsotropicKernel k = make_irregular_kernel();
  REQUIRE(k.profile(1.5) == 0.0);
  REQUIRE(k.profile(0.0) == 0.0);
  CounterRng rng(9, 2);
  for (int i = 0; i < 10000; ++i) REQUIRE(std::abs(k.profile(rng.uniform(0.0, 2.0))) <= 1.0);

  // Sign changes on [0.4, 0.5] exceed 10 (counted by fine sampling).
  int changes = 0;
  double prev = k.profile(0.4);
  for (int i = 1; i <= 200000; ++i) {
    const double v = k.profile(0.4 + 0.1 * i / 200000.0);
    if ((prev < 0 && v > 0) || (prev > 0 && v < 0)) ++changes;
    prev = v;
  }
  REQUIRE(changes > 10);

  check_oscillation_soundness(k, 1.2, 14);
  // Conservative full-range report on intervals spanning a period.
  const Interval wide = k.oscillation(0.05, 0.9);
  REQUIRE(wide.lo == -1.0);
  REQUIRE(wide.hi == 1.0);
}

TEST_CASE("lle sphere kernel and radial companion") {
  REQUIRE_THAT(std::acos(1.0 - 0.5 * 1.0 * 1.0), Catch::Matchers::WithinAbs(kPi / 3.0, 1e-15));
  REQUIRE_THROWS_AS(make_lle_sphere_kernel(1.5, 1.0), std::invalid_argument);

  // a = 0: constant 1 on the cap.
  {
    const auto [ck, iso] = make_lle_sphere_kernel(0.7, 0.0);
    REQUIRE(ck.profile(vec2(0.3, 0.2)) == 1.0);
    REQUIRE(iso.profile(0.9) == 1.0);
  }

  // Identity K_eps(exp_x^{-1} y) = Ktilde(|ix - iy| / eps) on S^2.
  Sphere s2(2);
  CounterRng rng(21, 4);
  double worst = 0.0;
  int tested = 0;
  for (int i = 0; i < 1400 || tested < 1000; ++i) {
    const double eps = rng.uniform(0.1, 1.2);
    const double a = rng.uniform(-1.0, 2.0);
    const auto [ck, iso] = make_lle_sphere_kernel(eps, a);
    const Vec x = s2.propose_uniform(rng);
    const Vec y = s2.propose_uniform(rng);
    if (s2.geodesic_distance(x, y) >= 0.9 * kPi) continue;
    ++tested;
    const Chart chart = s2.build_chart(x, 0.95 * kPi);
    const auto v = chart.inverse(s2.embed(y));
    REQUIRE(v.has_value());
    const double chart_value = ck.profile(Vec(*v / eps));
    const double radial_value = iso.profile(s2.ambient_distance(x, y) / eps);
    worst = std::max(worst, std::abs(chart_value - radial_value));
  }
  REQUIRE(worst < 1e-10);
}

TEST_CASE("normalization") {
  // Truncated quadratic with a solved analytically so the d=1 integral is 1:
  // 2 * (1 - a eps^2 / 6) = 1  =>  a = 3 / eps^2.
  const double eps = 0.5;
  const IsotropicKernel quad = make_quadratic_kernel(eps, 3.0 / (eps * eps));
  REQUIRE_THAT(normalization_integral(quad, 1), Catch::Matchers::WithinAbs(1.0, 1e-8));

  // chi_[0,1] in d=1 scales by 1/2.
  const IsotropicKernel box = make_step_kernel({{1.0, 0.0, 1.0}});
  const IsotropicKernel nbox = normalize(box, 1);
  REQUIRE_THAT(nbox.profile(0.3), Catch::Matchers::WithinRel(0.5, 1e-12));

  // Truncated Gaussian in d=2: scale = 1 / (pi (1 - e^-9)).
  const IsotropicKernel gauss = make_truncated_gaussian(3.0);
  const IsotropicKernel ngauss = normalize(gauss, 2);
  REQUIRE_THAT(ngauss.profile(0.0),
               Catch::Matchers::WithinRel(1.0 / (kPi * (1.0 - std::exp(-9.0))), 1e-8));

  // Idempotence: normalize(normalize(K)) = normalize(K) at sampled t.
  const IsotropicKernel n1 = normalize(gauss, 2);
  const IsotropicKernel n2 = normalize(n1, 2);
  CounterRng rng(2, 8);
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.uniform(0.0, 3.5);
    REQUIRE_THAT(n2.profile(t), Catch::Matchers::WithinAbs(n1.profile(t), 1e-12));
  }
  // Already-normalized kernel stays put.
  const IsotropicKernel uniform1 = make_uniform_kernel(1.0, 1);
  REQUIRE_THAT(normalize(uniform1, 1).profile(0.2),
               Catch::Matchers::WithinAbs(uniform1.profile(0.2), 1e-12));

  // Degenerate kernel: signed levels cancel exactly.
  const IsotropicKernel zero = make_step_kernel({{1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}});
  REQUIRE_THROWS_AS(normalize(zero, 1), numeric_error);

  // Divergent tail rejected.
  IsotropicKernel bad = make_cantor_example_kernel();
  bad.alpha = 0.5;
  REQUIRE_THROWS_AS(normalization_integral(bad, 1), std::invalid_argument);

  // Irregular kernel: documented looser tolerance (value is small but finite).
  const double irr = normalization_integral(make_irregular_kernel(), 1);
  REQUIRE(std::isfinite(irr));
  REQUIRE(std::abs(irr) < 0.5);
}
