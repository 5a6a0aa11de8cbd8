#pragma once

#include <map>
#include <numeric>

#include "manikde/descriptors.hpp"
#include "manikde/parallel.hpp"

namespace manikde {

struct BandwidthRule {
  enum class Kind { Fixed, List, Power, LogPower };
  Kind kind = Kind::Fixed;
  double value = 0.1;
  std::vector<double> list;
  double c = 1.0;
  double beta = 1.0 / 3.0;

  double eps_for(std::size_t cell, double n) const {
    switch (kind) {
      case Kind::Fixed: return value;
      case Kind::List:
        if (cell >= list.size()) throw config_error("bandwidth list shorter than n_list");
        return list[cell];
      case Kind::Power: return c * std::pow(n, -beta);
      case Kind::LogPower: return c * std::pow(std::log(n) / n, beta);
    }
    return value;
  }

  /// "fixed:0.1" | "list:0.2;0.1;0.05" | "power:c=1,beta=0.333" |
  /// "lognpow:c=1,beta=0.333"
  static BandwidthRule parse(const std::string& text) {
    BandwidthRule r;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "fixed") {
      r.kind = Kind::Fixed;
      r.value = std::stod(rest);
    } else if (head == "list") {
      r.kind = Kind::List;
      r.list = detail::split_nums(rest);
    } else if (head == "power" || head == "lognpow") {
      r.kind = head == "power" ? Kind::Power : Kind::LogPower;
      const auto d = detail::parse_descriptor(head + ":" + rest);
      r.c = detail::kv_num(d, "c", 1.0);
      r.beta = detail::kv_num(d, "beta", 1.0 / 3.0);
      if (r.beta <= 0.0) throw config_error("bandwidth rule: beta must be positive");
    } else {
      throw config_error("unknown bandwidth rule '" + text + "'");
    }
    return r;
  }
};

struct ExperimentPlan {
  std::string manifold = "circle";
  std::string density = "uniform";
  std::string kernel = "uniform:rho=1";
  std::vector<long> n_list;
  BandwidthRule bandwidth;
  int replicates = 1;
  int grid_resolution = 100;
  int quad_resolution = 0;  // 0: choose from eps
  std::uint64_t base_seed = 42;
  int workers = 1;
  bool normalize_kernel = true;

  void validate() const {
    if (n_list.empty()) throw config_error("plan: n_list is empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
      if (n_list[i] <= n_list[i - 1]) throw config_error("plan: n_list must be strictly increasing");
    if (replicates < 1) throw config_error("plan: replicates must be >= 1");
  }
};

struct RateRow {
  long n = 0;
  double eps = 0.0;
  int replicate = 0;
  double sup_err = 0.0;
  double l1_err = 0.0;
  double sup_var = 0.0;
  double sup_bias = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t count = 0;
};

struct CellSummary {
  long n = 0;
  double eps = 0.0;
  double sup_bias = 0.0;
  double median_sup_err = 0.0;
  double median_sup_var = 0.0;
  double median_l1_err = 0.0;
};

struct RateReport {
  std::vector<RateRow> rows;
  std::vector<CellSummary> cells;
  std::map<std::string, SlopeFit> slopes;
  std::vector<std::string> warnings;
  int grid_resolution = 0;
};

/// Ordinary least squares of log(error) on log(scale).
inline SlopeFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [scale, err] : pairs) {
    if (!(scale > 0.0) || !(err > 0.0))
      throw std::invalid_argument("fit_rate: scales and errors must be positive");
    const double x = std::log(scale), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pairs.size());
  const double denom = sxx - sx * sx / n;
  SlopeFit f;
  f.count = pairs.size();
  f.slope = (sxy - sx * sy / n) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [scale, err] : pairs)
    ss += sq(std::log(err) - (f.intercept + f.slope * std::log(scale)));
  f.stderr_slope = pairs.size() > 2 ? std::sqrt(ss / (n - 2.0) / denom) : 0.0;
  return f;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

namespace detail {

inline int auto_quad_resolution(const Manifold& m, double support_diameter) {
  const double span = std::min(support_diameter, 2.0 * m.geodesic_diameter());
  const double spacing_needed = span / 33.0;
  double scale = 0.0;
  switch (m.kind()) {
    case ManifoldKind::Circle:
      scale = 2.0 * kPi;
      break;
    case ManifoldKind::FatCantorCurve:
      scale = m.volume();
      break;
    case ManifoldKind::Sphere:
    case ManifoldKind::ProductOfCircles:
      scale = m.kind() == ManifoldKind::Sphere ? kPi : 2.0 * kPi;
      break;
  }
  int res = static_cast<int>(std::ceil(scale / spacing_needed));
  res = std::max(res, 64);
  const int cap = m.intrinsic_dim() == 1 ? (1 << 17) : (m.intrinsic_dim() == 2 ? 1024 : 96);
  return std::min(res, cap);
}

}  // namespace detail

/// Sweeps (n, eps) cells with seeded replicates: draws samples, evaluates the
/// estimator on the grid, and records sup/L1 errors against the exact density
/// along with the deterministic bias channel. Result rows are keyed by
/// (cell, replicate) slots, so the report is identical at any worker count.
inline RateReport run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  auto manifold = parse_manifold(plan.manifold);
  const int d = manifold->intrinsic_dim();
  DensityModel density = parse_density(plan.density, manifold);
  KernelSpec spec = parse_kernel(plan.kernel, d);
  if (spec.flavor == KernelSpec::Flavor::Chart)
    throw config_error("run_experiment: chart-kernel sweeps are not wired into plans");
  IsotropicKernel iso;
  const bool isotropic = spec.flavor == KernelSpec::Flavor::Isotropic;
  if (isotropic) iso = plan.normalize_kernel ? normalize(spec.iso, d) : spec.iso;

  RateReport report;
  report.grid_resolution = plan.grid_resolution;
  const QuadratureGrid grid = manifold->quadrature_grid(plan.grid_resolution);
  const std::size_t gq = grid.nodes.size();
  std::vector<double> exact(gq);
  for (std::size_t q = 0; q < gq; ++q) exact[q] = density.evaluate(grid.nodes[q].param);

  const std::size_t cells = plan.n_list.size();
  std::vector<double> eps_of(cells);
  for (std::size_t i = 0; i < cells; ++i)
    eps_of[i] = plan.bandwidth.eps_for(i, static_cast<double>(plan.n_list[i]));

  // Deterministic expectations per cell (replicate-independent).
  std::vector<std::vector<double>> expected(cells);
  std::vector<double> sup_bias(cells, 0.0);
  std::vector<PairKernel> pair_of(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double eps = eps_of[i];
    const double support =
        isotropic ? 2.0 * eps * iso.rho : 2.0 * eps;
    const int qres = plan.quad_resolution > 0
                         ? plan.quad_resolution
                         : detail::auto_quad_resolution(*manifold, support);
    const QuadratureGrid quad = manifold->quadrature_grid(qres);
    if (!isotropic) pair_of[i] = make_ball_pair_kernel(*manifold, eps);
    expected[i].resize(gq);
    std::vector<std::size_t> idx(gq);
    std::iota(idx.begin(), idx.end(), 0);
    parallel_for(gq, plan.workers, [&](std::size_t q) {
      expected[i][q] =
          isotropic
              ? expected_kde_isotropic(iso, eps, grid.nodes[q].param, density, quad)
              : expected_kde_pair(pair_of[i], grid.nodes[q].param, density, quad);
    });
    for (std::size_t q = 0; q < gq; ++q)
      sup_bias[i] = std::max(sup_bias[i], std::abs(expected[i][q] - exact[q]));
  }

  if (!isotropic) {
    // Theorem condition log n / (n eps^{2 alpha - d}) should decrease.
    double prev = kInf;
    for (std::size_t i = 0; i < cells; ++i) {
      const double n = static_cast<double>(plan.n_list[i]);
      const double v = std::log(n) / (n * std::pow(eps_of[i], 2.0 * pair_of[i].alpha - d));
      if (v > prev)
        report.warnings.push_back("L1 schedule: log n/(n eps^(2a-d)) not decreasing at n=" +
                                  std::to_string(plan.n_list[i]));
      prev = v;
    }
  }

  report.rows.assign(cells * plan.replicates, RateRow{});
  parallel_for(cells * plan.replicates, plan.workers, [&](std::size_t t) {
    const std::size_t i = t / plan.replicates;
    const int r = static_cast<int>(t % plan.replicates);
    const double eps = eps_of[i];
    const std::uint64_t stream = i * 1000003ULL + static_cast<std::uint64_t>(r);
    SampleSet s = sample(density, static_cast<int>(plan.n_list[i]), plan.base_seed, stream);
    std::unique_ptr<GridBucketIndex> index;
    if (isotropic && iso.compact_support())
      index = std::make_unique<GridBucketIndex>(s.ambient, eps * iso.rho);
    RateRow row;
    row.n = plan.n_list[i];
    row.eps = eps;
    row.replicate = r;
    for (std::size_t q = 0; q < gq; ++q) {
      const double est = isotropic
                             ? kde_isotropic(s, iso, eps, grid.nodes[q].param, index.get())
                             : kde_pair(s, pair_of[i], grid.nodes[q].param);
      row.sup_err = std::max(row.sup_err, std::abs(est - exact[q]));
      row.sup_var = std::max(row.sup_var, std::abs(est - expected[i][q]));
      row.l1_err += grid.nodes[q].weight * std::abs(est - exact[q]);
    }
    row.sup_bias = sup_bias[i];
    report.rows[t] = row;
  });

  for (std::size_t i = 0; i < cells; ++i) {
    CellSummary c;
    c.n = plan.n_list[i];
    c.eps = eps_of[i];
    c.sup_bias = sup_bias[i];
    std::vector<double> se, sv, l1;
    for (int r = 0; r < plan.replicates; ++r) {
      const RateRow& row = report.rows[i * plan.replicates + r];
      se.push_back(row.sup_err);
      sv.push_back(row.sup_var);
      l1.push_back(row.l1_err);
    }
    c.median_sup_err = median(se);
    c.median_sup_var = median(sv);
    c.median_l1_err = median(l1);
    report.cells.push_back(c);
  }

  auto try_fit = [&](const std::string& key, auto&& getter, auto&& scale) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : report.cells) {
      const double e = getter(c);
      if (e > 0.0) pts.push_back({scale(c), e});
    }
    if (pts.size() >= 3) report.slopes[key] = fit_rate(pts);
  };
  try_fit("sup_err_vs_n", [](const CellSummary& c) { return c.median_sup_err; },
          [](const CellSummary& c) { return static_cast<double>(c.n); });
  try_fit("sup_var_vs_n", [](const CellSummary& c) { return c.median_sup_var; },
          [](const CellSummary& c) { return static_cast<double>(c.n); });
  try_fit("l1_err_vs_n", [](const CellSummary& c) { return c.median_l1_err; },
          [](const CellSummary& c) { return static_cast<double>(c.n); });
  try_fit("sup_bias_vs_eps", [](const CellSummary& c) { return c.sup_bias; },
          [](const CellSummary& c) { return c.eps; });
  return report;
}

/// Slope of log median sup|K_n - E K_n| against log n at fixed eps
/// (theory: -1/2 up to the log factor).
inline SlopeFit variance_channel(const ExperimentPlan& plan) {
  if (plan.bandwidth.kind != BandwidthRule::Kind::Fixed)
    throw config_error("variance_channel: requires a fixed-eps plan");
  const RateReport rep = run_experiment(plan);
  return rep.slopes.at("sup_var_vs_n");
}

struct BiasChannel {
  std::vector<std::pair<double, double>> points;  // (eps, sup_bias)
  bool flat = false;                              // all biases below threshold
  SlopeFit fit;                                   // valid when !flat
};

/// Deterministic sup-bias against eps (quadrature only; no sampling).
inline BiasChannel bias_channel(const std::string& manifold_desc, const std::string& density_desc,
                                const std::string& kernel_desc, const std::vector<double>& eps_list,
                                int grid_resolution, double flat_threshold = 1e-3) {
  auto manifold = parse_manifold(manifold_desc);
  const int d = manifold->intrinsic_dim();
  DensityModel density = parse_density(density_desc, manifold);
  KernelSpec spec = parse_kernel(kernel_desc, d);
  if (spec.flavor != KernelSpec::Flavor::Isotropic)
    throw config_error("bias_channel: isotropic kernels only");
  if (!spec.iso.compact_support()) throw config_error("bias_channel: compactly supported kernels only");
  const IsotropicKernel k = normalize(spec.iso, d);
  const QuadratureGrid grid = manifold->quadrature_grid(grid_resolution);

  BiasChannel out;
  for (double eps : eps_list) {
    if (eps * k.rho > 0.5 * manifold->injectivity_radius())
      throw config_error("bias_channel: eps exceeds the injectivity-scaled cap");
    const int qres = detail::auto_quad_resolution(*manifold, 2.0 * eps * k.rho);
    const QuadratureGrid quad = manifold->quadrature_grid(qres);
    double bias = 0.0;
    for (const auto& node : grid.nodes) {
      const double e = expected_kde_isotropic(k, eps, node.param, density, quad);
      bias = std::max(bias, std::abs(e - density.evaluate(node.param)));
    }
    out.points.push_back({eps, bias});
  }
  out.flat = std::all_of(out.points.begin(), out.points.end(),
                         [&](const auto& p) { return p.second < flat_threshold; });
  if (!out.flat) out.fit = fit_rate(out.points);
  return out;
}

struct L1Channel {
  std::vector<std::pair<long, double>> table;  // (n, median L1 error)
  double spearman = 0.0;
  std::vector<std::string> warnings;
};

/// L1-consistency probe for the pair estimator: decay table over n plus a
/// Spearman monotone-trend statistic (the theorem gives no rate).
inline L1Channel l1_channel(const ExperimentPlan& plan) {
  const RateReport rep = run_experiment(plan);
  L1Channel out;
  out.warnings = rep.warnings;
  for (const auto& c : rep.cells) out.table.push_back({c.n, c.median_l1_err});
  const std::size_t n = out.table.size();
  if (n >= 2) {
    // Ranks of l1 values (n is already increasing, rank = index).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return out.table[a].second < out.table[b].second;
    });
    std::vector<double> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) rank[order[pos]] = static_cast<double>(pos);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) num += sq(static_cast<double>(i) - rank[i]);
    out.spearman = 1.0 - 6.0 * num / (n * (static_cast<double>(n) * n - 1.0));
  }
  return out;
}

}  // namespace manikde
