#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsmc/metric.hpp"
#include "igsmc/models.hpp"
#include "igsmc/ode_model.hpp"
#include "igsmc/smc.hpp"

namespace igsmc::tools {

inline constexpr const char* kVersionTag = "igsmc 0.3.0";

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Observation model and prior of an inference experiment. The fields that
/// apply depend on the experiment: the univariate ones use data_size,
/// data_mean, data_sd and the u/v prior; the ODE ones use the rest.
struct ModelSpec {
  // univariate Gaussian
  std::size_t data_size = 60;
  double data_mean = 50.0;
  double data_sd = 10.0;
  double u1 = 50.0, v1 = 20.0, u2 = 10.0, v2 = 2.5;

  // ODE systems
  std::vector<double> truth;
  std::vector<double> x0;
  double t_end = 10.0;
  std::size_t observations = 20;
  double noise_var = 0.4;
  std::string prior = "normal";  // normal | uniform
  std::vector<double> prior_mean;
  std::vector<double> prior_sd;
  std::vector<double> lower, upper;  // uniform prior limits

  std::uint64_t data_seed = 20240601;

  bool operator==(const ModelSpec&) const = default;
};

struct GeodesicSpec {
  double start_mean = 0.0, start_var = 1.0;
  double end_mean = 5.0, end_var = 3.0;
  std::vector<std::string> paths{"geodesic", "straight", "two-stage"};

  bool operator==(const GeodesicSpec&) const = default;
};

struct DriftRun {
  std::size_t populations = 45;
  double epsilon = 0.4;
  bool operator==(const DriftRun&) const = default;
};

struct DriftSpec {
  std::vector<DriftRun> runs;
  std::vector<std::vector<double>> grid;  // empty: the experiment's default grid
  bool operator==(const DriftSpec&) const = default;
};

struct SweepSpec {
  std::vector<std::size_t> populations;
  std::vector<std::string> kernels{"mmala", "adaptive-mvn"};
  bool operator==(const SweepSpec&) const = default;
};

struct ExperimentSpec {
  std::string name;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::string out_dir = "out";
  int threads = 1;
  std::size_t populations = 45;
  double phi2 = 5e-4;
  SmcConfig smc;
  ModelSpec model;
  GeodesicSpec geodesic;
  DriftSpec drift;
  SweepSpec sweep;
  bool write_plots = true;

  void validate() const;
};

/// Full-scale defaults for a named experiment.
ExperimentSpec default_spec(const std::string& name);

nlohmann::json to_json(const ExperimentSpec& spec);
/// Missing fields take the defaults of the named experiment.
ExperimentSpec spec_from_json(const nlohmann::json& j);
bool same_spec(const ExperimentSpec& a, const ExperimentSpec& b);

KernelType parse_kernel(const std::string& s);
std::string kernel_to_string(KernelType t);

// Model construction shared by the runner, tests and benchmarks.
std::vector<double> univariate_data(const ModelSpec& m);
std::shared_ptr<UnivariateGaussianModel> make_univariate_model(const ModelSpec& m);
std::shared_ptr<OdeInferenceModel> make_ode_model(const std::string& system, const ModelSpec& m,
                                                  const IntegratorOptions& options = {});
PriorSampler prior_sampler(const UnivariateGaussianModel& model);
PriorSampler prior_sampler(const PriorSpec& prior);
PriorSampler gaussian_sampler(double mean, double var);

/// The 24-point (mu, sigma) grid of the univariate drift study.
std::vector<Vector> univariate_drift_grid();
/// 24 points around the FitzHugh-Nagumo truth, inside the uniform limits.
std::vector<Vector> fitzhugh_nagumo_drift_grid();

std::vector<Gaussian1d> gaussian_path(const GeodesicSpec& g, const std::string& path,
                                      std::size_t n);

/// Model and prior sampler of an inference experiment (uni-*, fn-*, lv-*,
/// kernel-robustness, ess-trace).
struct InferenceSetup {
  std::shared_ptr<const TemperedModel> model;
  PriorSampler prior;
};
InferenceSetup inference_setup(const ExperimentSpec& spec);

/// One SMC run of an inference experiment with the given kernel and number
/// of tempered populations.
SmcResult run_inference(const ExperimentSpec& spec, const InferenceSetup& setup,
                        std::uint64_t seed, KernelType kernel, std::size_t populations,
                        int threads = 1);

/// Seed of replicate r, independent of scheduling order.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replicate);

struct RunManifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> replicate_files;
  std::vector<bool> completed;
  std::string version = kVersionTag;
};

/// Runs every replicate, writing outputs under spec.out_dir. The manifest is
/// written before the first replicate starts and updated as each finishes.
RunManifest run_experiment(const ExperimentSpec& spec);

}  // namespace igsmc::tools
