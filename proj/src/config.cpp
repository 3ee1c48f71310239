#include "kgap/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace kgap {

namespace {

std::string fail(const std::string& key, const std::string& what) {
  return "config: " + key + ": " + what;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InvalidArgument(fail(key, "expected a number"));
  return v.get<double>();
}

long integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw InvalidArgument(fail(key, "expected an integer"));
  return v.get<long>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw InvalidArgument(fail(key, "expected true or false"));
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw InvalidArgument(fail(key, "expected a string"));
  return v.get<std::string>();
}

std::vector<Mode> modes(const json& v, const std::string& key) {
  if (!v.is_array()) throw InvalidArgument(fail(key, "expected a list of [l1, l2, l3]"));
  std::vector<Mode> out;
  for (const auto& m : v) {
    if (!m.is_array() || m.size() != 3) throw InvalidArgument(fail(key, "each mode needs 3 integers"));
    Mode l{};
    for (int i = 0; i < 3; ++i) l[i] = static_cast<int>(integer(m[i], key));
    out.push_back(l);
  }
  if (out.empty()) throw InvalidArgument(fail(key, "needs at least one mode"));
  return out;
}

void one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> opts) {
  for (const char* o : opts)
    if (v == o) return;
  std::string list;
  for (const char* o : opts) list += std::string(list.empty() ? "" : ", ") + o;
  throw InvalidArgument(fail(key, "must be one of " + list + " (got '" + v + "')"));
}

// Re-throw module validation errors with the key that carries the value.
void check(const std::string& key, const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(fail(key, e.what()));
  }
}

}  // namespace

double RunConfig::l0() const { return std::ceil((37.0 + 5.0 * kernel.gamma) / (2.0 * y.m0)); }

void RunConfig::validate() const {
  check("gamma", [&] {
    if (!(kernel.gamma > 0.0 && kernel.gamma <= 1.0)) throw InvalidArgument("must lie in (0, 1]");
  });
  check("s", [&] {
    if (!(kernel.s > 0.0 && kernel.s < 1.0)) throw InvalidArgument("must lie in (0, 1)");
  });
  check("b0", [&] {
    if (!(kernel.b0 > 0.0)) throw InvalidArgument("must be positive");
  });
  check("theta_min_rad", [&] {
    if (!(kernel.theta_min > 0.0 && kernel.theta_min < KernelParams::theta_max))
      throw InvalidArgument("must lie in (0, pi/2)");
  });
  check("velocity_half_width", [&] {
    if (!(Lv > 0.0)) throw InvalidArgument("must be positive");
  });
  check("n_velocity", [&] {
    if (n < 4) throw InvalidArgument("must be at least 4");
    if (n % 2 != 0) throw InvalidArgument("must be even");
  });
  check("n_theta", [&] {
    if (n_theta < 1) throw InvalidArgument("must be positive");
  });
  check("n_phi", [&] {
    if (n_phi < 2 || n_phi % 2 != 0) throw InvalidArgument("must be even and at least 2");
  });
  check("split_radius", [&] {
    if (!(split_R > 0.0)) throw InvalidArgument("must be positive");
  });
  check("decomposition_delta", [&] {
    if (!(decomposition.delta > 0.0 && decomposition.delta < 1.0))
      throw InvalidArgument("must lie in (0, 1)");
  });
  check("decomposition_eps", [&] {
    if (!(decomposition.eps > 0.0 && decomposition.eps <= 1.0))
      throw InvalidArgument("must lie in (0, 1]");
  });
  check("decomposition_weight_k", [&] {
    if (!(decomposition.k >= 0.0)) throw InvalidArgument("must be nonnegative");
  });
  check("y_m0", [&] {
    const double lo = std::max(4.0 * kernel.s, 1.0);
    if (!(y.m0 > lo)) throw InvalidArgument("must exceed max{4s, 1} = " + std::to_string(lo));
  });
  check("y_l", [&] {
    if (!(y.l > 2.0)) throw InvalidArgument("must exceed 2");
  });
  check("k0", [&] {
    if (k0 < 0) throw InvalidArgument("must be nonnegative");
  });
  check("weight_k", [&] {
    if (!(weight_k >= 0.0)) throw InvalidArgument("must be nonnegative");
  });
  check("f0_y_norm", [&] {
    if (!(f0_y_norm >= 0.0)) throw InvalidArgument("must be nonnegative");
  });
  check("samples_pointwise", [&] {
    if (samples_pointwise < 1) throw InvalidArgument("must be positive");
  });
  check("samples_fields", [&] {
    if (samples_fields < 1) throw InvalidArgument("must be positive");
  });
  check("family_random", [&] {
    if (family_random < 0) throw InvalidArgument("must be nonnegative");
  });
  check("n_field_check", [&] {
    if (n_field_check < 4 || n_field_check % 2 != 0) throw InvalidArgument("must be even and at least 4");
  });
  check("velocity_half_width_field_check", [&] {
    if (!(Lv_field_check > 0.0)) throw InvalidArgument("must be positive");
  });
  one_of("evolve_mode", evolve_mode, {"linear", "nonlinear", "picard"});
  one_of("initial", initial, {"zero", "perturbation", "homogeneous", "rough"});
  one_of("weight", weight, {"gaussian", "polynomial", "both"});
  one_of("suite", suite, {"exact", "explicit", "constants", "fitted", "all"});
  check("dt", [&] { evolution.validate(); });
  check("multiplier_eps", [&] {
    MultiplierSymbol ms = evolution.multiplier;
    ms.s = kernel.s;
    ms.validate();
  });
}

json RunConfig::to_json() const {
  json j;
  j["gamma"] = kernel.gamma;
  j["s"] = kernel.s;
  j["b0"] = kernel.b0;
  j["theta_min_rad"] = kernel.theta_min;
  j["velocity_half_width"] = Lv;
  j["n_velocity"] = n;
  j["n_theta"] = n_theta;
  j["n_phi"] = n_phi;
  j["split_radius"] = split_R;
  j["decomposition_delta"] = decomposition.delta;
  j["decomposition_eps"] = decomposition.eps;
  j["decomposition_weight_k"] = decomposition.k;
  j["y_l"] = y.l;
  j["y_m0"] = y.m0;
  j["k0"] = k0;
  j["l0_derived"] = l0();
  j["dt"] = evolution.dt;
  j["t_end"] = evolution.t_end;
  j["T0"] = evolution.T0;
  j["integrator"] = to_string(evolution.integrator);
  j["picard_max"] = evolution.picard_max;
  j["picard_tol"] = evolution.picard_tol;
  j["eps0"] = evolution.eps0;
  j["multiplier_delta"] = evolution.multiplier.delta;
  j["multiplier_eps"] = evolution.multiplier.eps;
  j["multiplier_diagnostics"] = evolution.multiplier_diagnostics;
  j["evolve_mode"] = evolve_mode;
  j["initial"] = initial;
  j["f0_y_norm"] = f0_y_norm;
  json ms = json::array();
  for (const Mode& l : spectrum_modes) ms.push_back({l[0], l[1], l[2]});
  j["spectrum_modes"] = ms;
  j["weight"] = weight;
  j["weight_k"] = weight_k;
  j["compare_fourier"] = compare_fourier;
  j["suite"] = suite;
  j["samples_pointwise"] = samples_pointwise;
  j["samples_fields"] = samples_fields;
  j["family_random"] = family_random;
  j["n_field_check"] = n_field_check;
  j["velocity_half_width_field_check"] = Lv_field_check;
  j["seed"] = seed;
  return j;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be a JSON object");
  RunConfig c;
  using Setter = std::function<void(const json&, const std::string&)>;
  const std::map<std::string, Setter> keys = {
      {"gamma", [&](const json& v, const std::string& k) { c.kernel.gamma = number(v, k); }},
      {"s", [&](const json& v, const std::string& k) { c.kernel.s = number(v, k); }},
      {"b0", [&](const json& v, const std::string& k) { c.kernel.b0 = number(v, k); }},
      {"theta_min_rad", [&](const json& v, const std::string& k) { c.kernel.theta_min = number(v, k); }},
      {"velocity_half_width", [&](const json& v, const std::string& k) { c.Lv = number(v, k); }},
      {"n_velocity", [&](const json& v, const std::string& k) { c.n = static_cast<int>(integer(v, k)); }},
      {"n_theta", [&](const json& v, const std::string& k) { c.n_theta = static_cast<int>(integer(v, k)); }},
      {"n_phi", [&](const json& v, const std::string& k) { c.n_phi = static_cast<int>(integer(v, k)); }},
      {"split_radius", [&](const json& v, const std::string& k) { c.split_R = number(v, k); }},
      {"decomposition_delta", [&](const json& v, const std::string& k) { c.decomposition.delta = number(v, k); }},
      {"decomposition_eps", [&](const json& v, const std::string& k) { c.decomposition.eps = number(v, k); }},
      {"decomposition_weight_k", [&](const json& v, const std::string& k) { c.decomposition.k = number(v, k); }},
      {"y_l", [&](const json& v, const std::string& k) { c.y.l = number(v, k); }},
      {"y_m0", [&](const json& v, const std::string& k) { c.y.m0 = number(v, k); }},
      {"k0", [&](const json& v, const std::string& k) { c.k0 = static_cast<int>(integer(v, k)); }},
      {"dt", [&](const json& v, const std::string& k) { c.evolution.dt = number(v, k); }},
      {"t_end", [&](const json& v, const std::string& k) { c.evolution.t_end = number(v, k); }},
      {"T0", [&](const json& v, const std::string& k) { c.evolution.T0 = number(v, k); }},
      {"integrator", [&](const json& v, const std::string& k) {
         check(k, [&] { c.evolution.integrator = integrator_from(text(v, k)); });
       }},
      {"picard_max", [&](const json& v, const std::string& k) { c.evolution.picard_max = static_cast<int>(integer(v, k)); }},
      {"picard_tol", [&](const json& v, const std::string& k) { c.evolution.picard_tol = number(v, k); }},
      {"eps0", [&](const json& v, const std::string& k) { c.evolution.eps0 = number(v, k); }},
      {"multiplier_delta", [&](const json& v, const std::string& k) { c.evolution.multiplier.delta = number(v, k); }},
      {"multiplier_eps", [&](const json& v, const std::string& k) { c.evolution.multiplier.eps = number(v, k); }},
      {"multiplier_diagnostics", [&](const json& v, const std::string& k) { c.evolution.multiplier_diagnostics = boolean(v, k); }},
      {"evolve_mode", [&](const json& v, const std::string& k) { c.evolve_mode = text(v, k); }},
      {"initial", [&](const json& v, const std::string& k) { c.initial = text(v, k); }},
      {"f0_y_norm", [&](const json& v, const std::string& k) { c.f0_y_norm = number(v, k); }},
      {"spectrum_modes", [&](const json& v, const std::string& k) { c.spectrum_modes = modes(v, k); }},
      {"weight", [&](const json& v, const std::string& k) { c.weight = text(v, k); }},
      {"weight_k", [&](const json& v, const std::string& k) { c.weight_k = number(v, k); }},
      {"compare_fourier", [&](const json& v, const std::string& k) { c.compare_fourier = boolean(v, k); }},
      {"suite", [&](const json& v, const std::string& k) { c.suite = text(v, k); }},
      {"samples_pointwise", [&](const json& v, const std::string& k) { c.samples_pointwise = integer(v, k); }},
      {"samples_fields", [&](const json& v, const std::string& k) { c.samples_fields = static_cast<int>(integer(v, k)); }},
      {"family_random", [&](const json& v, const std::string& k) { c.family_random = static_cast<int>(integer(v, k)); }},
      {"n_field_check", [&](const json& v, const std::string& k) { c.n_field_check = static_cast<int>(integer(v, k)); }},
      {"velocity_half_width_field_check", [&](const json& v, const std::string& k) { c.Lv_field_check = number(v, k); }},
      {"seed", [&](const json& v, const std::string& k) {
         const long s = integer(v, k);
         if (s < 0) throw InvalidArgument(fail(k, "must be nonnegative"));
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  for (const auto& [k, v] : j.items()) {
    auto it = keys.find(k);
    if (it == keys.end()) throw InvalidArgument(fail(k, "unknown key"));
    if (v.is_object()) throw InvalidArgument(fail(k, "nested objects are not allowed"));
    it->second(v, k);
  }
  c.evolution.y = c.y;
  c.evolution.k0 = c.k0;
  c.evolution.k_weight = c.weight_k;
  c.evolution.multiplier.s = c.kernel.s;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace kgap
