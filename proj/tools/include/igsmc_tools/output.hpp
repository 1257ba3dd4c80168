#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsmc/smc.hpp"

namespace igsmc::tools {

/// Shortest decimal text that round-trips the double.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);

std::string diagnostics_csv(const std::vector<PopulationDiagnostics>& diags);
/// Final population only, or every stored population when history is kept.
std::string particles_csv(const SmcResult& result);
nlohmann::json summary_json(const SmcResult& result, const nlohmann::json& config,
                            std::uint64_t seed);
std::string drift_csv(const std::vector<DriftPath>& paths, const std::vector<std::string>& names);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal static SVG renderers. They never throw on odd data.
std::string svg_lines(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series);
std::string svg_histogram(const std::string& title, const std::vector<double>& values,
                          const std::vector<double>& weights, std::size_t bins = 40);

/// Renders and writes an SVG file, swallowing every error; plots never
/// affect the exit status.
void try_write_plot(const std::filesystem::path& path, const std::function<std::string()>& render);

}  // namespace igsmc::tools
