#pragma once

#include <cstdint>

#include "manikde/density.hpp"
#include "manikde/rng.hpp"

namespace manikde {

/// n i.i.d. draws from a density, with seed/stream provenance. Columns of
/// `params`/`ambient` are the points; the draw is a single serial stream, so
/// the set is bit-for-bit reproducible at any worker count.
struct SampleSet {
  std::shared_ptr<const Manifold> manifold;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Eigen::MatrixXd params;   // (param_dim x n)
  Eigen::MatrixXd ambient;  // (p x n)
  double acceptance_rate = 1.0;

  int n() const { return static_cast<int>(params.cols()); }

  Vec param(int i) const { return Vec(params.col(i)); }
  Vec point(int i) const { return Vec(ambient.col(i)); }
};

/// Rejection sampling: propose uniformly on the manifold, accept with
/// probability P(x) / P_max. Expected proposals per draw = P_max * volume.
inline SampleSet sample(const DensityModel& density, int n, std::uint64_t seed,
                        std::uint64_t stream = 0) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const Manifold& m = *density.manifold;
  const double predicted_rate = 1.0 / (density.p_max * m.volume());
  if (predicted_rate < 1e-4)
    throw config_error("sample: predicted acceptance rate below 1e-4");

  CounterRng rng(seed, stream);
  SampleSet s;
  s.manifold = density.manifold;
  s.seed = seed;
  s.stream = stream;
  s.params.resize(default_anchor(m).size(), n);
  s.ambient.resize(m.ambient_dim(), n);

  long proposals = 0;
  for (int i = 0; i < n; ++i) {
    for (;;) {
      ++proposals;
      const Vec x = m.propose_uniform(rng);
      if (rng.uniform() * density.p_max <= density.evaluate(x)) {
        s.params.col(i) = x;
        s.ambient.col(i) = m.embed(x);
        break;
      }
      if (proposals > 100000 && (i + 1.0) / static_cast<double>(proposals) < 1e-4)
        throw config_error("sample: observed acceptance rate below 1e-4");
    }
  }
  s.acceptance_rate = static_cast<double>(n) / static_cast<double>(proposals);
  return s;
}

}  // namespace manikde
