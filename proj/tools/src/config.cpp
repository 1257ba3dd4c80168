#include <algorithm>
#include <cmath>
#include <random>

#include "igsmc/errors.hpp"
#include "igsmc/geodesic.hpp"
#include "igsmc/rng.hpp"
#include "igsmc_tools/experiment.hpp"

namespace igsmc::tools {

using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "geodesic-ess", "uni-infer", "uni-drift",         "fn-infer",
      "fn-drift",     "lv-infer",  "kernel-robustness", "ess-trace"};
  return names;
}

bool is_experiment(const std::string& name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

KernelType parse_kernel(const std::string& s) {
  for (KernelType t : {KernelType::kUniformRandomWalk, KernelType::kAdaptiveMvn,
                       KernelType::kMmalaEuler, KernelType::kMmalaSimplified,
                       KernelType::kMmalaOzaki})
    if (s == kernel_name(t)) return t;
  throw ConfigurationError("unknown kernel '" + s + "'");
}

std::string kernel_to_string(KernelType t) { return kernel_name(t); }

namespace {

ModelSpec fitzhugh_nagumo_defaults() {
  ModelSpec m;
  m.truth = {0.2, 0.2, 3.0};
  m.x0 = {-1.0, 1.0};
  m.t_end = 10.0;
  m.observations = 25;
  m.noise_var = 0.05;
  m.prior_mean = m.truth;
  m.prior_sd = {0.3, 0.3, 1.5};
  m.lower = {0.0, 0.0, 0.0};
  m.upper = {1.0, 1.0, 7.0};
  return m;
}

ModelSpec lotka_volterra_defaults() {
  ModelSpec m;
  m.truth = {8.0, 0.5, 0.2, 0.01};
  m.x0 = {15.0, 30.0};
  m.t_end = 10.0;
  m.observations = 20;
  m.noise_var = 0.4;
  m.prior_mean = m.truth;
  m.prior_sd = {2.0, 0.1, 0.05, 0.004};
  // Truth +- 4 prior SDs, floored at zero.
  m.lower = {0.0, 0.1, 0.0, 0.0};
  m.upper = {16.0, 0.9, 0.4, 0.026};
  return m;
}

}  // namespace

ExperimentSpec default_spec(const std::string& name) {
  if (!is_experiment(name)) throw ConfigurationError("unknown experiment '" + name + "'");
  ExperimentSpec s;
  s.name = name;
  s.out_dir = "out/" + name;
  s.smc.ess_fraction = 0.3;
  s.smc.kernel.type = KernelType::kMmalaEuler;
  if (name == "geodesic-ess") {
    s.replicates = 10;
    s.populations = 25;
    s.smc.particles = 500;
    s.smc.weight_mode = WeightMode::kFullKernel;
    s.smc.full_weight_approx = FullWeightApprox::kPaired;
    s.smc.resampling = false;
    s.smc.kernel.type = KernelType::kUniformRandomWalk;
    s.smc.kernel.width = 0.25;
  } else if (name == "uni-infer" || name == "uni-drift") {
    s.populations = 45;
    s.phi2 = 5e-4;
    s.smc.particles = 1500;
    s.smc.kernel.epsilon = 0.4;
    if (name == "uni-drift")
      s.drift.runs = {{10, 0.4}, {45, 0.4}, {500, 0.4}, {45, 0.1}, {45, 0.7}, {180, 0.2}};
  } else if (name == "fn-infer" || name == "fn-drift") {
    s.model = fitzhugh_nagumo_defaults();
    s.populations = 50;
    s.smc.particles = 1000;
    s.smc.kernel.epsilon = 0.6;
    if (name == "fn-drift") s.drift.runs = {{50, 0.6}};
  } else {
    s.model = lotka_volterra_defaults();
    s.populations = 30;
    // The LV likelihood is sharp enough that a larger first exponent leaves
    // only a handful of prior draws with weight.
    s.phi2 = 1e-5;
    s.smc.particles = 1000;
    s.smc.kernel.epsilon = 0.5;
    if (name == "kernel-robustness") {
      s.replicates = 27;
      s.sweep.populations = {10, 15, 20, 30, 40, 50};
    } else if (name == "ess-trace") {
      s.replicates = 10;
      s.sweep.populations = {30};
    }
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (!is_experiment(name)) throw ConfigurationError("unknown experiment '" + name + "'");
  if (replicates < 1) throw ConfigurationError("replicates must be >= 1");
  if (populations < 2) throw ConfigurationError("need at least two populations");
  if (!(phi2 > 0.0 && phi2 < 1.0)) throw ConfigurationError("phi2 must lie in (0, 1)");
  if (threads < 0) throw ConfigurationError("threads must be >= 0");
  if (out_dir.empty()) throw ConfigurationError("empty output directory");
  smc.validate();
  if ((name == "uni-drift" || name == "fn-drift") && drift.runs.empty())
    throw ConfigurationError("drift experiment needs at least one run");
  for (const auto& r : drift.runs)
    if (r.populations < 2 || !(r.epsilon >= 0.0))
      throw ConfigurationError("drift run needs >= 2 populations and epsilon >= 0");
  if ((name == "kernel-robustness" || name == "ess-trace") &&
      (sweep.populations.empty() || sweep.kernels.empty()))
    throw ConfigurationError("sweep needs populations and kernels");
  for (const auto& k : sweep.kernels) (void)parse_kernel(k);
  for (auto p : sweep.populations)
    if (p < 2) throw ConfigurationError("sweep populations must be >= 2");
  if (name == "geodesic-ess")
    for (const auto& p : geodesic.paths)
      if (p != "geodesic" && p != "straight" && p != "two-stage")
        throw ConfigurationError("unknown path '" + p + "'");
  if (model.prior != "normal" && model.prior != "uniform")
    throw ConfigurationError("prior must be 'normal' or 'uniform'");
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const char* weight_mode_name(WeightMode m) {
  return m == WeightMode::kSimple ? "simple" : "full-kernel";
}
const char* approx_name(FullWeightApprox a) {
  return a == FullWeightApprox::kPaired ? "paired" : "marginal-mixture";
}
const char* scheme_name(ResampleScheme s) {
  return s == ResampleScheme::kMultinomial ? "multinomial" : "systematic";
}
const char* drift_form_name(DriftForm f) {
  return f == DriftForm::kPrinted ? "printed" : "christoffel";
}

json smc_json(const SmcConfig& c) {
  return {{"particles", c.particles},
          {"ess_fraction", c.ess_fraction},
          {"mcmc_steps", c.mcmc_steps},
          {"weight_mode", weight_mode_name(c.weight_mode)},
          {"full_weight_approx", approx_name(c.full_weight_approx)},
          {"resampling", c.resampling},
          {"scheme", scheme_name(c.scheme)},
          {"keep_history", c.keep_history},
          {"kernel",
           {{"type", kernel_name(c.kernel.type)},
            {"epsilon", c.kernel.epsilon},
            {"width", c.kernel.width},
            {"drift_form", drift_form_name(c.kernel.drift_form)},
            {"ozaki_covariance", c.kernel.ozaki_covariance == OzakiCovariance::kPrinted
                                     ? "printed"
                                     : "linearised-sde"}}}};
}

void smc_from_json(const json& j, SmcConfig& c) {
  read(j, "particles", c.particles);
  read(j, "ess_fraction", c.ess_fraction);
  read(j, "mcmc_steps", c.mcmc_steps);
  read(j, "resampling", c.resampling);
  read(j, "keep_history", c.keep_history);
  if (j.contains("weight_mode")) {
    const auto v = j.at("weight_mode").get<std::string>();
    if (v == "simple")
      c.weight_mode = WeightMode::kSimple;
    else if (v == "full-kernel")
      c.weight_mode = WeightMode::kFullKernel;
    else
      throw ConfigurationError("unknown weight_mode '" + v + "'");
  }
  if (j.contains("full_weight_approx")) {
    const auto v = j.at("full_weight_approx").get<std::string>();
    if (v == "paired")
      c.full_weight_approx = FullWeightApprox::kPaired;
    else if (v == "marginal-mixture")
      c.full_weight_approx = FullWeightApprox::kMarginalMixture;
    else
      throw ConfigurationError("unknown full_weight_approx '" + v + "'");
  }
  if (j.contains("scheme")) {
    const auto v = j.at("scheme").get<std::string>();
    if (v == "multinomial")
      c.scheme = ResampleScheme::kMultinomial;
    else if (v == "systematic")
      c.scheme = ResampleScheme::kSystematic;
    else
      throw ConfigurationError("unknown scheme '" + v + "'");
  }
  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    if (k.contains("type")) c.kernel.type = parse_kernel(k.at("type").get<std::string>());
    read(k, "epsilon", c.kernel.epsilon);
    read(k, "width", c.kernel.width);
    if (k.contains("drift_form")) {
      const auto v = k.at("drift_form").get<std::string>();
      if (v == "printed")
        c.kernel.drift_form = DriftForm::kPrinted;
      else if (v == "christoffel")
        c.kernel.drift_form = DriftForm::kChristoffel;
      else
        throw ConfigurationError("unknown drift_form '" + v + "'");
    }
    if (k.contains("ozaki_covariance")) {
      const auto v = k.at("ozaki_covariance").get<std::string>();
      if (v == "printed")
        c.kernel.ozaki_covariance = OzakiCovariance::kPrinted;
      else if (v == "linearised-sde")
        c.kernel.ozaki_covariance = OzakiCovariance::kLinearisedSde;
      else
        throw ConfigurationError("unknown ozaki_covariance '" + v + "'");
    }
  }
}

}  // namespace

json to_json(const ExperimentSpec& s) {
  json runs = json::array();
  for (const auto& r : s.drift.runs) runs.push_back({{"populations", r.populations}, {"epsilon", r.epsilon}});
  return {{"name", s.name},
          {"seed", s.seed},
          {"replicates", s.replicates},
          {"out_dir", s.out_dir},
          {"threads", s.threads},
          {"populations", s.populations},
          {"phi2", s.phi2},
          {"write_plots", s.write_plots},
          {"smc", smc_json(s.smc)},
          {"model",
           {{"data_size", s.model.data_size},
            {"data_mean", s.model.data_mean},
            {"data_sd", s.model.data_sd},
            {"u1", s.model.u1},
            {"v1", s.model.v1},
            {"u2", s.model.u2},
            {"v2", s.model.v2},
            {"truth", s.model.truth},
            {"x0", s.model.x0},
            {"t_end", s.model.t_end},
            {"observations", s.model.observations},
            {"noise_var", s.model.noise_var},
            {"prior", s.model.prior},
            {"prior_mean", s.model.prior_mean},
            {"prior_sd", s.model.prior_sd},
            {"lower", s.model.lower},
            {"upper", s.model.upper},
            {"data_seed", s.model.data_seed}}},
          {"geodesic",
           {{"start_mean", s.geodesic.start_mean},
            {"start_var", s.geodesic.start_var},
            {"end_mean", s.geodesic.end_mean},
            {"end_var", s.geodesic.end_var},
            {"paths", s.geodesic.paths}}},
          {"drift", {{"runs", runs}, {"grid", s.drift.grid}}},
          {"sweep", {{"populations", s.sweep.populations}, {"kernels", s.sweep.kernels}}}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("name"))
    throw ConfigurationError("config must be an object with a 'name'");
  ExperimentSpec s = default_spec(j.at("name").get<std::string>());
  try {
    read(j, "seed", s.seed);
    read(j, "replicates", s.replicates);
    read(j, "out_dir", s.out_dir);
    read(j, "threads", s.threads);
    read(j, "populations", s.populations);
    read(j, "phi2", s.phi2);
    read(j, "write_plots", s.write_plots);
    if (j.contains("smc")) smc_from_json(j.at("smc"), s.smc);
    if (j.contains("model")) {
      const json& m = j.at("model");
      read(m, "data_size", s.model.data_size);
      read(m, "data_mean", s.model.data_mean);
      read(m, "data_sd", s.model.data_sd);
      read(m, "u1", s.model.u1);
      read(m, "v1", s.model.v1);
      read(m, "u2", s.model.u2);
      read(m, "v2", s.model.v2);
      read(m, "truth", s.model.truth);
      read(m, "x0", s.model.x0);
      read(m, "t_end", s.model.t_end);
      read(m, "observations", s.model.observations);
      read(m, "noise_var", s.model.noise_var);
      read(m, "prior", s.model.prior);
      read(m, "prior_mean", s.model.prior_mean);
      read(m, "prior_sd", s.model.prior_sd);
      read(m, "lower", s.model.lower);
      read(m, "upper", s.model.upper);
      read(m, "data_seed", s.model.data_seed);
    }
    if (j.contains("geodesic")) {
      const json& g = j.at("geodesic");
      read(g, "start_mean", s.geodesic.start_mean);
      read(g, "start_var", s.geodesic.start_var);
      read(g, "end_mean", s.geodesic.end_mean);
      read(g, "end_var", s.geodesic.end_var);
      read(g, "paths", s.geodesic.paths);
    }
    if (j.contains("drift")) {
      const json& d = j.at("drift");
      if (d.contains("runs")) {
        s.drift.runs.clear();
        for (const auto& r : d.at("runs"))
          s.drift.runs.push_back({r.at("populations").get<std::size_t>(), r.at("epsilon").get<double>()});
      }
      read(d, "grid", s.drift.grid);
    }
    if (j.contains("sweep")) {
      read(j.at("sweep"), "populations", s.sweep.populations);
      read(j.at("sweep"), "kernels", s.sweep.kernels);
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("malformed config: ") + e.what());
  }
  return s;
}

bool same_spec(const ExperimentSpec& a, const ExperimentSpec& b) { return to_json(a) == to_json(b); }

std::vector<double> univariate_data(const ModelSpec& m) {
  Rng rng = make_stream(m.data_seed, 0, 0);
  std::normal_distribution<double> nd(m.data_mean, m.data_sd);
  std::vector<double> x(m.data_size);
  for (auto& v : x) v = nd(rng);
  return x;
}

std::shared_ptr<UnivariateGaussianModel> make_univariate_model(const ModelSpec& m) {
  return std::make_shared<UnivariateGaussianModel>(univariate_data(m),
                                                   UnivariatePrior{m.u1, m.v1, m.u2, m.v2});
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::shared_ptr<OdeInferenceModel> make_ode_model(const std::string& system, const ModelSpec& m,
                                                  const IntegratorOptions& options) {
  OdeModelConfig c;
  if (system == "fitzhugh-nagumo")
    c.system = fitzhugh_nagumo_system();
  else if (system == "lotka-volterra")
    c.system = lotka_volterra_system();
  else
    throw ConfigurationError("unknown ODE system '" + system + "'");
  const auto D = c.system->param_dim();
  if (m.truth.size() != D || m.x0.size() != c.system->state_dim())
    throw ConfigurationError("truth or x0 has the wrong length for " + system);
  c.x0 = to_vector(m.x0);
  c.times = equally_spaced_times(0.0, m.t_end, m.observations);
  c.options = options;
  c.noise = NoiseModel::normal(
      Vector::Constant(static_cast<Eigen::Index>(c.system->state_dim()), std::sqrt(m.noise_var)));
  Rng rng = make_stream(m.data_seed, 0, 1);
  c.data = simulate_observations(*c.system, c.x0, to_vector(m.truth), c.times, c.noise, rng,
                                 options);
  if (m.prior == "uniform") {
    c.prior = PriorSpec::uniform(to_vector(m.lower), to_vector(m.upper));
  } else {
    if (m.prior_mean.size() != D || m.prior_sd.size() != D)
      throw ConfigurationError("prior mean/sd have the wrong length");
    const Vector sd = to_vector(m.prior_sd);
    c.prior = PriorSpec::mvn(to_vector(m.prior_mean), sd.cwiseAbs2().asDiagonal(), true);
  }
  return std::make_shared<OdeInferenceModel>(std::move(c));
}

PriorSampler prior_sampler(const UnivariateGaussianModel& model) {
  const UnivariatePrior p = model.prior();
  return [p](Rng& rng) {
    std::normal_distribution<double> n01;
    Vector x(2);
    x[0] = p.u1 + p.v1 * n01(rng);
    do x[1] = p.u2 + p.v2 * n01(rng);
    while (!(x[1] > 0.0));
    return x;
  };
}

PriorSampler prior_sampler(const PriorSpec& prior) {
  return [prior](Rng& rng) { return prior.sample(rng); };
}

PriorSampler gaussian_sampler(double mean, double var) {
  const double sd = std::sqrt(var);
  return [mean, sd](Rng& rng) {
    std::normal_distribution<double> n01;
    Vector x(1);
    x[0] = mean + sd * n01(rng);
    return x;
  };
}

std::vector<Vector> univariate_drift_grid() {
  std::vector<Vector> g;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) g.push_back(Vector{{30.0 + 8.0 * i, 4.0 + 4.0 * j}});
  return g;
}

std::vector<Vector> fitzhugh_nagumo_drift_grid() {
  std::vector<Vector> g;
  const double as[] = {0.1, 0.35}, bs[] = {0.1, 0.35, 0.6}, cs[] = {1.5, 2.5, 3.5, 4.5};
  for (double a : as)
    for (double b : bs)
      for (double c : cs) g.push_back(Vector{{a, b, c}});
  return g;
}

std::vector<Gaussian1d> gaussian_path(const GeodesicSpec& g, const std::string& path,
                                      std::size_t n) {
  const GaussianPoint p1{g.start_mean, g.start_var}, p2{g.end_mean, g.end_var};
  GaussianPath pts;
  if (path == "geodesic")
    pts = geodesic_between(p1, p2, n);
  else if (path == "straight")
    pts = straight_line_path(p1, p2, n);
  else if (path == "two-stage")
    pts = two_stage_path(p1, p2, n);
  else
    throw ConfigurationError("unknown path '" + path + "'");
  std::vector<Gaussian1d> out;
  for (const auto& p : pts) out.push_back({p.mu, p.var});
  return out;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate) {
  return mix_seed(seed, 0x7265706cULL, replicate);
}

InferenceSetup inference_setup(const ExperimentSpec& spec) {
  InferenceSetup s;
  if (spec.name.rfind("uni-", 0) == 0) {
    auto m = make_univariate_model(spec.model);
    s.prior = prior_sampler(*m);
    s.model = m;
  } else if (spec.name.rfind("fn-", 0) == 0) {
    auto m = make_ode_model("fitzhugh-nagumo", spec.model);
    s.prior = prior_sampler(m->config().prior);
    s.model = m;
  } else if (spec.name == "geodesic-ess") {
    throw ConfigurationError("geodesic-ess has no inference model");
  } else {
    auto m = make_ode_model("lotka-volterra", spec.model);
    s.prior = prior_sampler(m->config().prior);
    s.model = m;
  }
  return s;
}

SmcResult run_inference(const ExperimentSpec& spec, const InferenceSetup& setup,
                        std::uint64_t seed, KernelType kernel, std::size_t populations,
                        int threads) {
  SmcConfig c = spec.smc;
  c.seed = seed;
  c.threads = threads;
  c.kernel.type = kernel;
  TemperedSequence seq(setup.model, TemperingSchedule::geometric(populations, spec.phi2));
  return run(c, seq, setup.prior);
}

}  // namespace igsmc::tools
