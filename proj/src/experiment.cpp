#include "fidelity/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fidelity/quantum_exact.hpp"
#include "fidelity/serialization.hpp"

namespace fidelity {

using nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string momenta_name(MomentumSampling m) { return m == MomentumSampling::grid ? "grid" : "continuous"; }

MomentumSampling momenta_from(const std::string& s) {
  if (s == "continuous") return MomentumSampling::continuous;
  if (s == "grid") return MomentumSampling::grid;
  throw ValidationError("momentum_sampling must be 'continuous' or 'grid', got '" + s + "'");
}

bool supports(Method m, const StateSpec& s) {
  switch (m) {
    case Method::exact:
    case Method::dr_general:
      return true;
    case Method::dr_pos_form:
      return std::holds_alternative<spec::Gaussian>(s) || std::holds_alternative<spec::PositionState>(s);
    case Method::dr_mom_form:
      return std::holds_alternative<spec::Gaussian>(s) || std::holds_alternative<spec::MomentumState>(s);
    case Method::dr_no_interference:
      return std::holds_alternative<spec::CoherentPair>(s) || std::holds_alternative<spec::IncoherentPair>(s);
    case Method::wigner_overlap:
      return std::holds_alternative<spec::Gaussian>(s) || std::holds_alternative<spec::RandomState>(s);
  }
  return false;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  validate_spec(spec, params);
  if (methods.empty()) throw ValidationError("config: at least one method is required");
  for (Method m : methods) {
    if (!supports(m, spec))
      throw ValidationError("config: method '" + to_string(m) + "' does not apply to state '" + spec_type_name(spec) + "'");
  }
  estimator().validate();
  if (output_path.empty()) throw ValidationError("config: output_path is empty");
}

EstimatorConfig ExperimentConfig::estimator() const {
  EstimatorConfig e;
  e.n_trajectories = n_trajectories;
  e.seed = seed;
  e.t_max = t_max;
  e.interference = true;
  e.workers = workers;
  e.momenta = momenta;
  return e;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["params"] = {{"n", c.params.n}, {"k", c.params.k}, {"epsilon", c.params.epsilon}, {"hbar", c.params.hbar}};
  j["spec"] = spec_to_json(c.spec);
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["t_max"] = c.t_max;
  j["n_trajectories"] = c.n_trajectories;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output_path"] = c.output_path;
  j["momentum_sampling"] = momenta_name(c.momenta);
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  // A sidecar written by write_outputs nests the resolved config.
  if (j.contains("config") && j.contains("version") && j.at("config").is_object()) return config_from_json(j.at("config"));
  ExperimentConfig c;
  if (j.contains("params")) {
    const json& p = j.at("params");
    const int n = get_or(p, "n", c.params.n);
    const double k = get_or(p, "k", c.params.k);
    const double eps = get_or(p, "epsilon", c.params.epsilon);
    const double hbar = get_or(p, "hbar", MapParams::default_hbar(n));
    c.params = MapParams::make(n, k, eps, hbar);
  }
  if (j.contains("spec")) c.spec = spec_from_json(j.at("spec"));
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
  }
  c.t_max = get_or(j, "t_max", c.t_max);
  c.n_trajectories = get_or(j, "n_trajectories", c.n_trajectories);
  c.seed = get_or(j, "seed", c.seed);
  c.workers = get_or(j, "workers", c.workers);
  c.output_path = get_or(j, "output_path", c.output_path);
  c.momenta = momenta_from(get_or<std::string>(j, "momentum_sampling", momenta_name(c.momenta)));
  return c;
}

void ConfigOverrides::apply(ExperimentConfig& c) const {
  const int new_n = n.value_or(c.params.n);
  // A new n without an explicit ħ moves ħ with the default convention.
  const double new_hbar = hbar ? *hbar : (n ? MapParams::default_hbar(new_n) : c.params.hbar);
  c.params = MapParams::make(new_n, k.value_or(c.params.k), epsilon.value_or(c.params.epsilon), new_hbar);
  if (t_max) c.t_max = *t_max;
  if (n_trajectories) c.n_trajectories = *n_trajectories;
  if (seed) c.seed = *seed;
  if (workers) c.workers = *workers;
  if (output_path) c.output_path = *output_path;
  if (momenta) c.momenta = *momenta;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig3", "fig4"};
  return names;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.t_max = 50;
  c.output_path = name + ".csv";
  auto gaussian = [&](double sigma_units) {
    c.params = MapParams::make(1000, 0.95, 0.015);
    c.spec = spec::Gaussian{0.7 * kPi, 0.4 * kPi, sigma_units * kPi};
    c.methods = {Method::exact, Method::dr_general, Method::dr_pos_form, Method::dr_mom_form};
    c.n_trajectories = 1000;
  };
  auto pair_params = [&] { c.params = MapParams::make(200, 0.7, 0.02); };
  if (name == "fig1a") {
    gaussian(0.004);
  } else if (name == "fig1b") {
    gaussian(0.16);
  } else if (name == "fig1c") {
    gaussian(0.04);
  } else if (name == "fig2a" || name == "fig2b") {
    pair_params();
    c.spec = spec::CoherentPair{0.4 * kPi, (name == "fig2a" ? 1.2 : 0.42) * kPi};
    c.methods = {Method::exact, Method::dr_general, Method::dr_no_interference};
    c.n_trajectories = 400;
  } else if (name == "fig3") {
    pair_params();
    c.spec = spec::IncoherentPair{0.4 * kPi, 0.42 * kPi};
    c.methods = {Method::exact, Method::dr_general};
    c.n_trajectories = 200;
  } else if (name == "fig4") {
    c.params = MapParams::make(100, 2.0, 0.03);
    c.spec = spec::RandomState{};
    c.methods = {Method::exact, Method::dr_general};
    c.n_trajectories = 1000;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ValidationError("unknown preset '" + name + "'; valid presets: " + valid);
  }
  return c;
}

FidelitySeries compute_method(Method method, const ExperimentConfig& config) {
  const auto est = config.estimator();
  const auto& p = config.params;
  const auto& s = config.spec;
  FidelitySeries out;
  switch (method) {
    case Method::exact:
      out = exact_fidelity(s, config.t_max, p, config.workers);
      break;
    case Method::dr_general:
      out = dr_fidelity(s, est, p);
      break;
    case Method::dr_pos_form:
      if (const auto* g = std::get_if<spec::Gaussian>(&s)) {
        out = dr_gaussian_pos_localized(g->Q, g->P, g->sigma, est, p);
      } else if (const auto* ps = std::get_if<spec::PositionState>(&s)) {
        out = dr_position_form(ps->Q, est, p);
      } else {
        throw ValidationError("dr_pos_form requires a Gaussian or position state");
      }
      break;
    case Method::dr_mom_form:
      if (const auto* g = std::get_if<spec::Gaussian>(&s)) {
        out = dr_gaussian_mom_localized(g->Q, g->P, g->sigma, est, p);
      } else if (std::holds_alternative<spec::MomentumState>(s)) {
        out = dr_fidelity(s, est, p);
      } else {
        throw ValidationError("dr_mom_form requires a Gaussian or momentum state");
      }
      break;
    case Method::dr_no_interference:
      if (const auto* c = std::get_if<spec::CoherentPair>(&s)) {
        auto off = est;
        off.interference = false;
        out = dr_coherent_pair(c->Q1, c->Q2, off, p);
      } else if (const auto* c = std::get_if<spec::IncoherentPair>(&s)) {
        out = dr_incoherent_pair(c->Q1, c->Q2, est, p);
      } else {
        throw ValidationError("dr_no_interference requires a two-position state");
      }
      break;
    case Method::wigner_overlap:
      out = wigner_overlap_fidelity(s, est, p);
      break;
  }
  out.method = method;
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult r;
  for (Method m : config.methods) r.series.push_back(compute_method(m, config));
  return r;
}

std::string format_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::ostringstream os;
  os << "t,method,M,O_re,O_im,std_err,n_samples,seed\n";
  const auto nt = static_cast<std::size_t>(config.t_max) + 1;
  for (std::size_t t = 0; t < nt; ++t) {
    for (const auto& s : result.series) {
      os << t << ',' << to_string(s.method) << ',' << fmt17(s.fidelity[t]) << ',' << fmt17(s.amplitude[t].real()) << ','
         << fmt17(s.amplitude[t].imag()) << ',' << fmt17(s.std_error[t]) << ',' << s.n_samples << ',' << config.seed
         << '\n';
    }
  }
  return os.str();
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  std::filesystem::path side = p;
  side.replace_extension(".json");
  if (side == p) side = std::filesystem::path(csv_path + ".meta.json");
  return side.string();
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  write_file(config.output_path, format_csv(config, result));
  json side;
  side["version"] = std::string(kVersion);
  side["config"] = config_to_json(config);
  write_file(sidecar_path(config.output_path), side.dump(2) + "\n");
}

DiagnosticsResult run_diagnostics(const DiagnosticsConfig& config) {
  config.params.validate();
  DiagnosticsResult r;
  r.w = potential_correlator(PotentialKind::W, config.options, config.params);
  r.v = potential_correlator(PotentialKind::V, config.options, config.params);
  const double hbar = config.params.hbar;
  const double eps = config.params.epsilon;
  json s;
  s["version"] = std::string(kVersion);
  s["params"] = {{"n", config.params.n}, {"k", config.params.k}, {"epsilon", eps}, {"hbar", hbar}};
  s["max_lag"] = config.options.max_lag;
  s["n_samples"] = config.options.n_samples;
  s["seed"] = config.options.seed;
  s["C_W0"] = r.w.values[0];
  s["C_W0_std_err"] = r.w.std_error[0];
  s["C_V0"] = r.v.values[0];
  s["C_V0_std_err"] = r.v.std_error[0];
  s["K_W"] = r.w.diffusion_sum;
  s["K_V"] = r.v.diffusion_sum;
  s["C_W_inf"] = r.w.asymptotic_mean;
  s["C_V_inf"] = r.v.asymptotic_mean;
  // Off-diagonal minus diagonal dephasing rates; the topological-entropy and
  // algebraic-growth terms are not estimated.
  s["offdiag_rate_chaotic"] = (r.w.diffusion_sum - r.v.diffusion_sum * eps * eps) / (hbar * hbar);
  s["offdiag_rate_integrable"] = (r.w.asymptotic_mean - r.v.asymptotic_mean * eps * eps) / (2.0 * hbar * hbar);
  s["epsilon_sq_bound_integrable"] =
      r.v.asymptotic_mean != 0.0 ? json(r.w.asymptotic_mean / r.v.asymptotic_mean) : json(nullptr);
  r.summary = s;
  return r;
}

std::string format_diagnostics_csv(const DiagnosticsResult& result) {
  std::ostringstream os;
  os << "lag,C_W,C_V\n";
  for (std::size_t t = 0; t < result.w.lags.size(); ++t)
    os << result.w.lags[t] << ',' << fmt17(result.w.values[t]) << ',' << fmt17(result.v.values[t]) << '\n';
  return os.str();
}

void write_diagnostics(const DiagnosticsConfig& config, const DiagnosticsResult& result) {
  write_file(config.output_path, format_diagnostics_csv(result));
  write_file(sidecar_path(config.output_path), result.summary.dump(2) + "\n");
}

}  // namespace fidelity
