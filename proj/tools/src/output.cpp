#include "igsmc_tools/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace igsmc::tools {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string diagnostics_csv(const std::vector<PopulationDiagnostics>& diags) {
  std::ostringstream os;
  os << "population,phi,ess,acceptance_rate,resampled,jitter_events\n";
  for (const auto& d : diags) {
    os << d.population << ',' << format_double(d.phi) << ',' << format_double(d.ess) << ','
       << format_double(d.acceptance_rate) << ',' << (d.resampled ? 1 : 0) << ','
       << d.jitter_events << '\n';
  }
  return os.str();
}

std::string particles_csv(const SmcResult& result) {
  std::ostringstream os;
  os << "population,particle_index,weight";
  for (const auto& n : result.parameter_names) os << ',' << n;
  os << '\n';
  auto emit = [&](std::size_t population, const std::vector<Vector>& xs,
                  const std::vector<double>& ws) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      os << population << ',' << i << ',' << format_double(ws[i]);
      for (Eigen::Index k = 0; k < xs[i].size(); ++k) os << ',' << format_double(xs[i][k]);
      os << '\n';
    }
  };
  if (!result.history.empty()) {
    for (const auto& s : result.history) emit(s.population, s.positions, s.weights);
  } else if (!result.final_population.particles.empty()) {
    const Population& pop = result.final_population;
    std::vector<Vector> xs;
    for (const auto& p : pop.particles) xs.push_back(p.position);
    emit(result.diagnostics.size(), xs, pop.weights());
  }
  return os.str();
}

namespace {

nlohmann::json vec_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json summary_json(const SmcResult& result, const nlohmann::json& config,
                            std::uint64_t seed) {
  nlohmann::json j;
  const PosteriorSummary& s = result.summary;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < result.parameter_names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    params[result.parameter_names[i]] = {{"mean", s.mean[k]}, {"sd", s.sd[k]}};
  }
  j["parameters"] = params;
  j["parameter_order"] = result.parameter_names;
  nlohmann::json corr = nlohmann::json::array();
  for (Eigen::Index r = 0; r < s.correlation.rows(); ++r)
    for (Eigen::Index c = 0; c < s.correlation.cols(); ++c)
      corr.push_back(finite_or_null(s.correlation(r, c)));
  j["correlation"] = corr;
  j["mean"] = vec_json(s.mean);
  j["sd"] = vec_json(s.sd);
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : result.diagnostics) {
    diags.push_back({{"population", d.population},
                     {"phi", d.phi},
                     {"ess", d.ess},
                     {"acceptance_rate", d.acceptance_rate},
                     {"resampled", d.resampled},
                     {"jitter_events", d.jitter_events},
                     {"integration_failures", d.integration_failures},
                     {"zero_denominator", d.zero_denominator}});
  }
  j["diagnostics"] = diags;
  j["config"] = config;
  j["seed"] = seed;
  return j;
}

std::string drift_csv(const std::vector<DriftPath>& paths, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "particle,step";
  for (const auto& n : names) os << ',' << n;
  os << ",truncated\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    for (std::size_t s = 0; s < p.points.size(); ++s) {
      os << i << ',' << s;
      for (Eigen::Index k = 0; k < p.points[s].size(); ++k)
        os << ',' << format_double(p.points[s][k]);
      os << ',' << (p.truncated && s + 1 == p.points.size() ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 55;
const char* kColors[] = {"#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '&')
      o += "&amp;";
    else
      o += c;
  }
  return o;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void widen(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl,
                 const std::string& yl) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << esc(title) << "</text>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
     << kH - kB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.3g", xv);
    std::snprintf(by, sizeof by, "%.3g", yv);
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << kH - kB + 16
       << "\" text-anchor=\"middle\">" << bx << "</text>\n";
    os << "<text x=\"" << kL - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << by
       << "</text>\n";
  }
  os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\">" << esc(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (kT + kH - kB) / 2 << ")\">" << esc(yl) << "</text>\n";
  return os.str();
}

}  // namespace

std::string svg_lines(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream os;
  os << axes(f, title, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        os << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << kW - kR - 110 << "\" y=\"" << kT + 14 * (k + 1) << "\" fill=\"" << col
       << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram(const std::string& title, const std::vector<double>& values,
                          const std::vector<double>& weights, std::size_t bins) {
  if (bins == 0) bins = 1;
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  widen(lo, hi);
  std::vector<double> h(bins, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    auto b = static_cast<std::size_t>((values[i] - lo) / (hi - lo) * static_cast<double>(bins));
    b = std::min(b, bins - 1);
    h[b] += i < weights.size() ? weights[i] : 1.0;
  }
  const double top = std::max(*std::max_element(h.begin(), h.end()), 1e-300);
  const Frame f{lo, hi, 0.0, top};
  std::ostringstream os;
  os << axes(f, title, "value", "weight");
  const double bw = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double xa = f.px(lo + bw * static_cast<double>(b));
    const double xb = f.px(lo + bw * static_cast<double>(b + 1));
    const double y = f.py(h[b]);
    os << "<rect x=\"" << xa << "\" y=\"" << y << "\" width=\"" << std::max(xb - xa - 1, 0.5)
       << "\" height=\"" << f.py(0) - y << "\" fill=\"#1f77b4\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void try_write_plot(const std::filesystem::path& path, const std::function<std::string()>& render) {
  try {
    write_text(path, render());
  } catch (...) {
  }
}

}  // namespace igsmc::tools
