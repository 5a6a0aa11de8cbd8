#pragma once

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "manikde/density.hpp"
#include "manikde/estimators.hpp"
#include "manikde/fat_cantor.hpp"
#include "manikde/kernels.hpp"

namespace manikde {

namespace detail {

struct Descriptor {
  std::string head;
  std::map<std::string, std::string> kv;
};

inline Descriptor parse_descriptor(const std::string& text) {
  Descriptor d;
  const auto colon = text.find(':');
  d.head = text.substr(0, colon);
  if (colon == std::string::npos) return d;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw config_error("bad descriptor token '" + item + "' in '" + text + "'");
    d.kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return d;
}

inline double kv_num(const Descriptor& d, const std::string& key, double fallback,
                     bool required = false) {
  const auto it = d.kv.find(key);
  if (it == d.kv.end()) {
    if (required) throw config_error("descriptor '" + d.head + "' requires " + key + "=");
    return fallback;
  }
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw config_error("descriptor '" + d.head + "': bad number '" + it->second + "'");
  return v;
}

inline std::vector<double> split_nums(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(std::stod(item));
  return out;
}

}  // namespace detail

inline std::shared_ptr<const Manifold> parse_manifold(const std::string& text) {
  const auto d = detail::parse_descriptor(text);
  if (d.head == "sphere")
    return std::make_shared<Sphere>(static_cast<int>(detail::kv_num(d, "d", 2)));
  if (d.head == "circle") return std::make_shared<Circle>();
  if (d.head == "torus")
    return std::make_shared<FlatTorus>(static_cast<int>(detail::kv_num(d, "d", 2)));
  if (d.head == "fatcantor") {
    FatCantorParams p;
    p.depth = static_cast<int>(detail::kv_num(d, "depth", 10));
    p.bump_amplitude = detail::kv_num(d, "amp", 0.05);
    return std::make_shared<FatCantorCurve>(p);
  }
  throw config_error("unknown manifold descriptor '" + text + "'");
}

/// Kernel flavors resolvable from a descriptor. Pair kernels depend on the
/// bandwidth, so they are carried as a factory kind and built per eps.
struct KernelSpec {
  enum class Flavor { Isotropic, Chart, Pair };
  Flavor flavor = Flavor::Isotropic;
  IsotropicKernel iso;
  ChartKernel chart;
  IsotropicKernel chart_companion;  // radial route of the chart kernel, if any
  std::string pair_kind;
};

/// `d` is the intrinsic dimension used for normalized kernel families.
/// Descriptors: uniform:rho=, step:c=..;..,a=..;..,b=..;.., cantor, irregular,
/// lle:eps=,a=, quadratic:eps=,a=, gauss[:cut=], ballpair.
inline KernelSpec parse_kernel(const std::string& text, int d) {
  const auto desc = detail::parse_descriptor(text);
  KernelSpec spec;
  if (desc.head == "uniform") {
    spec.iso = make_uniform_kernel(detail::kv_num(desc, "rho", 1.0), d);
  } else if (desc.head == "step") {
    const auto ci = desc.kv.find("c"), ai = desc.kv.find("a"), bi = desc.kv.find("b");
    if (ci == desc.kv.end() || ai == desc.kv.end() || bi == desc.kv.end())
      throw config_error("step kernel descriptor requires c=, a=, b= lists");
    const auto cs = detail::split_nums(ci->second);
    const auto as = detail::split_nums(ai->second);
    const auto bs = detail::split_nums(bi->second);
    if (cs.size() != as.size() || as.size() != bs.size())
      throw config_error("step kernel descriptor: c, a, b lists must have equal length");
    std::vector<StepLevel> levels;
    for (std::size_t i = 0; i < cs.size(); ++i) levels.push_back({cs[i], as[i], bs[i]});
    spec.iso = make_step_kernel(levels);
  } else if (desc.head == "cantor") {
    spec.iso = make_cantor_example_kernel();
  } else if (desc.head == "irregular") {
    spec.iso = make_irregular_kernel();
  } else if (desc.head == "gauss") {
    spec.iso = make_truncated_gaussian(detail::kv_num(desc, "cut", 3.0));
  } else if (desc.head == "quadratic") {
    spec.iso = make_quadratic_kernel(detail::kv_num(desc, "eps", 0.5, true),
                                     detail::kv_num(desc, "a", 1.0, true));
  } else if (desc.head == "lle") {
    auto [ck, iso] = make_lle_sphere_kernel(detail::kv_num(desc, "eps", 0.5, true),
                                            detail::kv_num(desc, "a", 1.0, true), d);
    spec.flavor = KernelSpec::Flavor::Chart;
    spec.chart = std::move(ck);
    spec.chart_companion = std::move(iso);
  } else if (desc.head == "ballpair") {
    spec.flavor = KernelSpec::Flavor::Pair;
    spec.pair_kind = "ballpair";
  } else {
    throw config_error("unknown kernel descriptor '" + text + "'");
  }
  return spec;
}

inline DensityModel parse_density(const std::string& text, std::shared_ptr<const Manifold> m) {
  const auto d = detail::parse_descriptor(text);
  if (d.head == "uniform") return uniform_density(m);
  if (d.head == "holder")
    return holder_density(m, detail::kv_num(d, "kappa", 1.0), detail::kv_num(d, "strength", 0.5));
  if (d.head == "piecewise") return piecewise_density(m, detail::kv_num(d, "jump", 0.5));
  throw config_error("unknown density descriptor '" + text + "'");
}

}  // namespace manikde
