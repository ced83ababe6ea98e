#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace inpaint_lab::experiment {

namespace fs = std::filesystem;

enum class PlotKind { kGanLoss, kEnhanceLoss, kInpaintTrace };
std::string_view to_string(PlotKind k);
PlotKind parse_plot_kind(std::string_view name);

struct SeriesStats {
  double first = 0.0;
  double last = 0.0;
  double min = 0.0;
  double max = 0.0;
  double max_abs = 0.0;
};

struct PlotSummary {
  PlotKind kind = PlotKind::kGanLoss;
  std::string source;
  std::string x_column;
  std::size_t rows = 0;
  std::map<std::string, SeriesStats> series;
  // inpaint-trace only: max over rows of |total - contextual|.
  std::optional<double> max_abs_total_minus_contextual;

  nlohmann::json to_json() const;
  static PlotSummary from_json(const nlohmann::json& j);
};

// Reads a history/trace CSV with the header expected for `kind` and
// computes the per-series statistics. Empty or mis-shaped CSVs are
// validation errors.
PlotSummary summarize_csv(const fs::path& csv, PlotKind kind);

// Line plot PNG of every series against the x column, plus
// `<out_png minus .png>.summary.json`. Returns the summary path.
fs::path emit_plot(const fs::path& csv, const fs::path& out_png, PlotKind kind);

fs::path summary_path_for(const fs::path& out_png);

}  // namespace inpaint_lab::experiment
