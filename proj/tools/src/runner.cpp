#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>

#ifdef IGSMC_HAVE_OPENMP
#include <omp.h>
#endif

#include "igsmc/errors.hpp"
#include "igsmc_tools/experiment.hpp"
#include "igsmc_tools/output.hpp"

namespace fs = std::filesystem;

namespace igsmc::tools {

using nlohmann::json;

namespace {

std::string rep_dir_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%03zu", r);
  return buf;
}

std::string tag(std::size_t p, double eps) {
  std::ostringstream os;
  os << "p" << p << "_eps" << eps;
  return os.str();
}

bool is_inference(const std::string& n) {
  return n == "uni-infer" || n == "fn-infer" || n == "lv-infer";
}

std::vector<std::string> param_names(const std::string& name) {
  if (name.rfind("uni-", 0) == 0) return {"mu", "sigma"};
  if (name.rfind("fn-", 0) == 0) return {"a", "b", "c"};
  return {"alpha", "beta", "gamma", "delta"};
}

// Files a replicate writes, relative to the output directory.
std::vector<std::string> planned_files(const ExperimentSpec& s, std::size_t r) {
  const std::string d = rep_dir_name(r) + "/";
  std::vector<std::string> f;
  if (s.name == "geodesic-ess") {
    for (const auto& p : s.geodesic.paths) f.push_back(d + p + "_diagnostics.csv");
  } else if (is_inference(s.name)) {
    f = {d + "diagnostics.csv", d + "particles.csv", d + "summary.json"};
  } else if (s.name == "uni-drift") {
    for (const auto& run : s.drift.runs) f.push_back(d + "drift_" + tag(run.populations, run.epsilon) + ".csv");
  } else if (s.name == "fn-drift") {
    for (const char* prior : {"normal", "uniform"})
      for (const auto& run : s.drift.runs)
        f.push_back(d + "drift_" + prior + "_" + tag(run.populations, run.epsilon) + ".csv");
  } else if (s.name == "kernel-robustness") {
    f = {d + "estimates.csv"};
  } else if (s.name == "ess-trace") {
    for (const auto& k : s.sweep.kernels)
      for (auto p : s.sweep.populations)
        f.push_back(d + k + "_p" + std::to_string(p) + "_diagnostics.csv");
  }
  return f;
}

json manifest_json(const RunManifest& m) {
  json reps = json::array();
  for (std::size_t r = 0; r < m.replicate_files.size(); ++r)
    reps.push_back({{"index", r},
                    {"seed", replicate_seed(m.seed, r)},
                    {"files", m.replicate_files[r]},
                    {"completed", static_cast<bool>(m.completed[r])}});
  return {{"version", m.version}, {"seed", m.seed}, {"config", m.config}, {"replicates", reps}};
}

// Per-replicate results kept in memory for the cross-replicate aggregate.
struct ReplicateOutput {
  json summary;
};

std::vector<Series> ess_series(const std::vector<PopulationDiagnostics>& d, const std::string& label) {
  Series s{label, {}, {}};
  for (const auto& x : d) {
    s.x.push_back(static_cast<double>(x.population));
    s.y.push_back(x.ess);
  }
  return {s};
}

ReplicateOutput run_geodesic(const ExperimentSpec& s, std::uint64_t seed, const fs::path& dir,
                             int threads) {
  ReplicateOutput out;
  std::vector<Series> plot;
  for (const auto& path : s.geodesic.paths) {
    GaussianPathSequence seq(gaussian_path(s.geodesic, path, s.populations));
    SmcConfig c = s.smc;
    c.seed = seed;
    c.threads = threads;
    const SmcResult res =
        run(c, seq, gaussian_sampler(s.geodesic.start_mean, s.geodesic.start_var));
    write_text(dir / (path + "_diagnostics.csv"), diagnostics_csv(res.diagnostics));
    std::vector<double> ess;
    for (const auto& d : res.diagnostics) ess.push_back(d.ess);
    out.summary[path] = ess;
    auto ser = ess_series(res.diagnostics, path);
    plot.push_back(ser[0]);
  }
  if (s.write_plots)
    try_write_plot(dir / "ess.svg", [&] { return svg_lines("ESS by path", "population", "ESS", plot); });
  return out;
}

ReplicateOutput run_single_inference(const ExperimentSpec& s, const InferenceSetup& setup,
                                     std::uint64_t seed, const fs::path& dir, int threads) {
  const SmcResult res =
      run_inference(s, setup, seed, s.smc.kernel.type, s.populations, threads);
  write_text(dir / "diagnostics.csv", diagnostics_csv(res.diagnostics));
  write_text(dir / "particles.csv", particles_csv(res));
  const json sum = summary_json(res, to_json(s), seed);
  write_text(dir / "summary.json", sum.dump(2));
  if (s.write_plots) {
    try_write_plot(dir / "ess.svg", [&] {
      return svg_lines("ESS", "population", "ESS", ess_series(res.diagnostics, "ESS"));
    });
    const auto w = res.final_population.weights();
    for (std::size_t k = 0; k < res.parameter_names.size(); ++k) {
      try_write_plot(dir / ("marginal_" + res.parameter_names[k] + ".svg"), [&] {
        std::vector<double> v;
        for (const auto& p : res.final_population.particles)
          v.push_back(p.position[static_cast<Eigen::Index>(k)]);
        return svg_histogram("posterior " + res.parameter_names[k], v, w);
      });
    }
  }
  ReplicateOutput out;
  out.summary = {{"mean", sum["mean"]}, {"sd", sum["sd"]}};
  return out;
}

void plot_drift(const fs::path& file, const std::vector<DriftPath>& paths, const std::string& title) {
  try_write_plot(file, [&] {
    std::vector<Series> ser;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      Series s{i == 0 ? "paths" : "", {}, {}};
      for (const auto& p : paths[i].points) {
        s.x.push_back(p[0]);
        s.y.push_back(p[1]);
      }
      ser.push_back(std::move(s));
    }
    return svg_lines(title, "coordinate 1", "coordinate 2", ser);
  });
}

ReplicateOutput run_drift(const ExperimentSpec& s, const fs::path& dir) {
  ReplicateOutput out;
  const auto names = param_names(s.name);
  std::vector<Vector> grid;
  for (const auto& g : s.drift.grid)
    grid.push_back(Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size())));
  if (s.name == "uni-drift") {
    if (grid.empty()) grid = univariate_drift_grid();
    auto model = make_univariate_model(s.model);
    for (const auto& run : s.drift.runs) {
      TemperedSequence seq(model, TemperingSchedule::geometric(run.populations, s.phi2));
      KernelSpec k = s.smc.kernel;
      k.epsilon = run.epsilon;
      const auto paths = drift_paths(seq, grid, k);
      const std::string t = tag(run.populations, run.epsilon);
      write_text(dir / ("drift_" + t + ".csv"), drift_csv(paths, names));
      if (s.write_plots) plot_drift(dir / ("drift_" + t + ".svg"), paths, "drift " + t);
      json ends = json::array();
      for (const auto& p : paths) ends.push_back({p.points.back()[0], p.points.back()[1]});
      out.summary[t] = ends;
    }
  } else {
    if (grid.empty()) grid = fitzhugh_nagumo_drift_grid();
    for (const std::string prior : {"normal", "uniform"}) {
      ModelSpec m = s.model;
      m.prior = prior;
      auto model = make_ode_model("fitzhugh-nagumo", m);
      for (const auto& run : s.drift.runs) {
        TemperedSequence seq(model, TemperingSchedule::geometric(run.populations, s.phi2));
        KernelSpec k = s.smc.kernel;
        k.epsilon = run.epsilon;
        const auto paths = drift_paths(seq, grid, k);
        const std::string t = prior + "_" + tag(run.populations, run.epsilon);
        write_text(dir / ("drift_" + t + ".csv"), drift_csv(paths, names));
        if (s.write_plots) plot_drift(dir / ("drift_" + t + ".svg"), paths, "drift " + t);
        std::size_t truncated = 0;
        for (const auto& p : paths) truncated += p.truncated;
        out.summary[t] = {{"truncated", truncated}};
      }
    }
  }
  return out;
}

ReplicateOutput run_robustness(const ExperimentSpec& s, const InferenceSetup& setup,
                               std::uint64_t seed, const fs::path& dir, int threads) {
  const auto names = param_names(s.name);
  std::ostringstream csv;
  csv << "kernel,populations";
  for (const auto& n : names) csv << ',' << n;
  csv << ",final_ess,mean_acceptance\n";
  ReplicateOutput out;
  for (const auto& kname : s.sweep.kernels)
    for (auto p : s.sweep.populations) {
      const SmcResult res = run_inference(s, setup, seed, parse_kernel(kname), p, threads);
      double acc = 0.0;
      for (std::size_t i = 1; i < res.diagnostics.size(); ++i) acc += res.diagnostics[i].acceptance_rate;
      acc /= static_cast<double>(res.diagnostics.size() - 1);
      csv << kname << ',' << p;
      std::vector<double> mean;
      for (Eigen::Index k = 0; k < res.summary.mean.size(); ++k) {
        csv << ',' << format_double(res.summary.mean[k]);
        mean.push_back(res.summary.mean[k]);
      }
      csv << ',' << format_double(res.final_population.ess) << ',' << format_double(acc) << '\n';
      out.summary[kname][std::to_string(p)] = mean;
    }
  write_text(dir / "estimates.csv", csv.str());
  return out;
}

ReplicateOutput run_ess_trace(const ExperimentSpec& s, const InferenceSetup& setup,
                              std::uint64_t seed, const fs::path& dir, int threads) {
  ReplicateOutput out;
  for (const auto& kname : s.sweep.kernels)
    for (auto p : s.sweep.populations) {
      const SmcResult res = run_inference(s, setup, seed, parse_kernel(kname), p, threads);
      write_text(dir / (kname + "_p" + std::to_string(p) + "_diagnostics.csv"),
                 diagnostics_csv(res.diagnostics));
      std::vector<double> ess, acc;
      for (const auto& d : res.diagnostics) {
        ess.push_back(d.ess);
        acc.push_back(d.acceptance_rate);
      }
      out.summary[kname][std::to_string(p)] = {{"ess", ess}, {"acceptance", acc}};
    }
  return out;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

void aggregate(const ExperimentSpec& s, const std::vector<ReplicateOutput>& reps,
               const fs::path& dir) {
  json agg;
  agg["experiment"] = s.name;
  agg["replicates"] = reps.size();
  if (s.name == "geodesic-ess") {
    std::ostringstream csv;
    csv << "population";
    for (const auto& p : s.geodesic.paths) csv << ',' << p;
    csv << '\n';
    std::map<std::string, std::vector<double>> mean;
    for (const auto& p : s.geodesic.paths) {
      std::vector<double> m(s.populations, 0.0);
      for (const auto& r : reps) {
        const auto e = r.summary.at(p).get<std::vector<double>>();
        for (std::size_t a = 0; a < m.size(); ++a) m[a] += e[a] / static_cast<double>(reps.size());
      }
      mean[p] = m;
    }
    for (std::size_t a = 0; a < s.populations; ++a) {
      csv << a + 1;
      for (const auto& p : s.geodesic.paths) csv << ',' << format_double(mean[p][a]);
      csv << '\n';
    }
    write_text(dir / "ess_trace.csv", csv.str());
    std::size_t wins = 0;
    for (const auto& r : reps) {
      bool best = r.summary.contains("geodesic");
      if (!best) break;
      const double g = r.summary.at("geodesic").back().get<double>();
      for (const auto& p : s.geodesic.paths)
        if (p != "geodesic" && !(g > r.summary.at(p).back().get<double>())) best = false;
      wins += best;
    }
    agg["geodesic_wins"] = wins;
    agg["mean_ess"] = mean;
    if (s.write_plots)
      try_write_plot(dir / "ess_trace.svg", [&] {
        std::vector<Series> ser;
        for (const auto& p : s.geodesic.paths) {
          Series x{p, {}, mean[p]};
          for (std::size_t a = 0; a < s.populations; ++a) x.x.push_back(static_cast<double>(a + 1));
          ser.push_back(x);
        }
        return svg_lines("mean ESS over replicates", "population", "ESS", ser);
      });
  } else if (s.name == "kernel-robustness") {
    const auto names = param_names(s.name);
    std::ostringstream csv;
    csv << "kernel,populations,parameter,variance_of_mean\n";
    for (const auto& k : s.sweep.kernels)
      for (auto p : s.sweep.populations)
        for (std::size_t i = 0; i < names.size(); ++i) {
          std::vector<double> v;
          for (const auto& r : reps) v.push_back(r.summary.at(k).at(std::to_string(p)).at(i).get<double>());
          const double var = sample_variance(v);
          csv << k << ',' << p << ',' << names[i] << ',' << format_double(var) << '\n';
          agg["variance"][k][std::to_string(p)][names[i]] = var;
        }
    write_text(dir / "robustness.csv", csv.str());
  } else if (s.name == "ess-trace") {
    std::ostringstream csv;
    csv << "kernel,populations,population,mean_ess,mean_acceptance_rate\n";
    std::vector<Series> ser;
    for (const auto& k : s.sweep.kernels)
      for (auto p : s.sweep.populations) {
        std::vector<double> me(p, 0.0), ma(p, 0.0);
        for (const auto& r : reps) {
          const auto& x = r.summary.at(k).at(std::to_string(p));
          const auto e = x.at("ess").get<std::vector<double>>();
          const auto a = x.at("acceptance").get<std::vector<double>>();
          for (std::size_t i = 0; i < p; ++i) {
            me[i] += e[i] / static_cast<double>(reps.size());
            ma[i] += a[i] / static_cast<double>(reps.size());
          }
        }
        Series sr{k + " p" + std::to_string(p), {}, me};
        for (std::size_t i = 0; i < p; ++i) {
          csv << k << ',' << p << ',' << i + 1 << ',' << format_double(me[i]) << ','
              << format_double(ma[i]) << '\n';
          sr.x.push_back(static_cast<double>(i + 1));
        }
        ser.push_back(sr);
      }
    write_text(dir / "ess_trace.csv", csv.str());
    if (s.write_plots)
      try_write_plot(dir / "ess_trace.svg",
                     [&] { return svg_lines("mean ESS", "population", "ESS", ser); });
  } else {
    json per = json::array();
    for (const auto& r : reps) per.push_back(r.summary);
    agg["per_replicate"] = per;
  }
  write_text(dir / "aggregate.json", agg.dump(2));
}

}  // namespace

RunManifest run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const fs::path dir(spec.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string());

  RunManifest manifest;
  manifest.config = to_json(spec);
  manifest.seed = spec.seed;
  for (std::size_t r = 0; r < spec.replicates; ++r) manifest.replicate_files.push_back(planned_files(spec, r));
  manifest.completed.assign(spec.replicates, false);
  write_text(dir / "manifest.json", manifest_json(manifest).dump(2));

  InferenceSetup setup;
  if (spec.name != "geodesic-ess" && spec.name != "uni-drift" && spec.name != "fn-drift")
    setup = inference_setup(spec);

  const int outer = spec.threads > 0 ? spec.threads : 1;
  const int inner = outer > 1 ? 1 : spec.threads;
  std::vector<ReplicateOutput> outputs(spec.replicates);
  std::mutex mtx;
  std::exception_ptr error;

  auto one = [&](std::size_t r) {
    const fs::path rdir = dir / rep_dir_name(r);
    fs::create_directories(rdir);
    const std::uint64_t seed = replicate_seed(spec.seed, r);
    ReplicateOutput o;
    if (spec.name == "geodesic-ess")
      o = run_geodesic(spec, seed, rdir, inner);
    else if (is_inference(spec.name))
      o = run_single_inference(spec, setup, seed, rdir, inner);
    else if (spec.name == "uni-drift" || spec.name == "fn-drift")
      o = run_drift(spec, rdir);
    else if (spec.name == "kernel-robustness")
      o = run_robustness(spec, setup, seed, rdir, inner);
    else
      o = run_ess_trace(spec, setup, seed, rdir, inner);
    std::lock_guard<std::mutex> lock(mtx);
    outputs[r] = std::move(o);
    manifest.completed[r] = true;
    write_text(dir / "manifest.json", manifest_json(manifest).dump(2));
  };

#ifdef IGSMC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(outer)
#endif
  for (long long r = 0; r < static_cast<long long>(spec.replicates); ++r) {
    try {
      one(static_cast<std::size_t>(r));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mtx);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  aggregate(spec, outputs, dir);
  return manifest;
}

}  // namespace igsmc::tools
