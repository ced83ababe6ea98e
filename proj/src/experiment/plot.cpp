#include "experiment/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/fsutil.hpp"
#include "image/codec.hpp"
#include "image/image.hpp"

namespace inpaint_lab::experiment {

using nlohmann::json;

std::string_view to_string(PlotKind k) {
  switch (k) {
    case PlotKind::kGanLoss: return "gan-loss";
    case PlotKind::kEnhanceLoss: return "enhance-loss";
    case PlotKind::kInpaintTrace: return "inpaint-trace";
  }
  return "gan-loss";
}

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "gan-loss") return PlotKind::kGanLoss;
  if (name == "enhance-loss") return PlotKind::kEnhanceLoss;
  if (name == "inpaint-trace") return PlotKind::kInpaintTrace;
  fail_validation("unknown plot kind '" + std::string(name) +
                  "' (expected gan-loss, enhance-loss or inpaint-trace)");
}

namespace {

struct Layout {
  std::string x;
  std::vector<std::string> ys;
};

Layout layout_for(PlotKind k) {
  switch (k) {
    case PlotKind::kGanLoss:
      return {"step", {"critic_loss", "wasserstein_estimate", "generator_loss", "grad_penalty"}};
    case PlotKind::kEnhanceLoss: return {"epoch", {"mean_loss"}};
    case PlotKind::kInpaintTrace: return {"iter", {"contextual", "perceptual", "total"}};
  }
  return {};
}

struct Columns {
  std::vector<double> x;
  std::vector<std::vector<double>> ys;
};

Columns read_columns(const fs::path& csv, const Layout& layout) {
  if (!fs::exists(csv)) fail_validation("plot input not found: " + csv.string());
  CsvTable t;
  try {
    t = CsvTable::read(csv);
  } catch (const RuntimeFailure& e) {
    fail_validation(csv.string() + ": " + e.what());
  }
  std::vector<std::string> expected{layout.x};
  expected.insert(expected.end(), layout.ys.begin(), layout.ys.end());
  for (const auto& name : expected)
    if (std::find(t.header.begin(), t.header.end(), name) == t.header.end())
      fail_validation(csv.string() + ": missing column '" + name + "'");
  if (t.rows.empty()) fail_validation(csv.string() + ": no data rows to plot");
  Columns c;
  try {
    c.x = t.numeric_column(layout.x);
    for (const auto& y : layout.ys) c.ys.push_back(t.numeric_column(y));
  } catch (const std::exception& e) {
    fail_validation(csv.string() + ": " + e.what());
  }
  return c;
}

SeriesStats stats(const std::vector<double>& v) {
  SeriesStats s;
  s.first = v.front();
  s.last = v.back();
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  for (double x : v) s.max_abs = std::max(s.max_abs, std::abs(x));
  return s;
}

using Rgb = std::array<std::uint8_t, 3>;

class Canvas {
 public:
  Canvas(int h, int w) : img_(h, w) { std::fill(img_.data().begin(), img_.data().end(), 255); }

  void put(int y, int x, Rgb c) {
    if (y < 0 || x < 0 || y >= img_.height() || x >= img_.width()) return;
    for (int k = 0; k < 3; ++k) img_.at(y, x, k) = c[static_cast<std::size_t>(k)];
  }

  void line(double x0, double y0, double x1, double y1, Rgb c) {
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      put(y, x, c);
      put(y + 1, x, c);
    }
  }

  const ImageU8& image() const { return img_; }

 private:
  ImageU8 img_;
};

constexpr std::array<Rgb, 4> kPalette{{{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}}};

void render(const Columns& c, const fs::path& out) {
  constexpr int kW = 720, kH = 400, kMargin = 36;
  Canvas cv(kH, kW);
  double lo = c.ys[0][0], hi = lo;
  for (const auto& y : c.ys)
    for (double v : y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double x_lo = c.x.front();
  const double x_hi = c.x.size() > 1 ? c.x.back() : x_lo + 1.0;
  const double pw = kW - 2 * kMargin, ph = kH - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kMargin + (hi - y) / (hi - lo) * ph; };

  const Rgb grid{225, 225, 225}, axis{0, 0, 0};
  for (int k = 0; k <= 4; ++k) {
    const double y = kMargin + ph * k / 4.0;
    cv.line(kMargin, y, kW - kMargin, y, grid);
  }
  if (lo < 0.0 && hi > 0.0) cv.line(kMargin, py(0.0), kW - kMargin, py(0.0), {150, 150, 150});
  cv.line(kMargin, kMargin, kMargin, kH - kMargin, axis);
  cv.line(kMargin, kH - kMargin, kW - kMargin, kH - kMargin, axis);

  for (std::size_t s = 0; s < c.ys.size(); ++s) {
    const Rgb col = kPalette[s % kPalette.size()];
    const auto& y = c.ys[s];
    if (y.size() == 1) {
      cv.line(px(c.x[0]) - 2, py(y[0]), px(c.x[0]) + 2, py(y[0]), col);
      continue;
    }
    for (std::size_t i = 1; i < y.size(); ++i)
      if (std::isfinite(y[i - 1]) && std::isfinite(y[i]))
        cv.line(px(c.x[i - 1]), py(y[i - 1]), px(c.x[i]), py(y[i]), col);
  }
  write_png(out, cv.image());
}

}  // namespace

json PlotSummary::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["source"] = source;
  j["x_column"] = x_column;
  j["rows"] = rows;
  json s = json::object();
  for (const auto& [name, st] : series)
    s[name] = {{"first", st.first}, {"last", st.last}, {"min", st.min},
               {"max", st.max},     {"max_abs", st.max_abs}};
  j["series"] = s;
  if (max_abs_total_minus_contextual)
    j["max_abs_total_minus_contextual"] = *max_abs_total_minus_contextual;
  return j;
}

PlotSummary PlotSummary::from_json(const json& j) {
  PlotSummary p;
  try {
    p.kind = parse_plot_kind(j.at("kind").get<std::string>());
    p.source = j.at("source").get<std::string>();
    p.x_column = j.at("x_column").get<std::string>();
    p.rows = j.at("rows").get<std::size_t>();
    for (const auto& [name, st] : j.at("series").items())
      p.series[name] = {st.at("first").get<double>(), st.at("last").get<double>(),
                        st.at("min").get<double>(), st.at("max").get<double>(),
                        st.at("max_abs").get<double>()};
    if (j.contains("max_abs_total_minus_contextual"))
      p.max_abs_total_minus_contextual = j["max_abs_total_minus_contextual"].get<double>();
  } catch (const json::exception& e) {
    fail_validation(std::string("malformed plot summary: ") + e.what());
  }
  return p;
}

PlotSummary summarize_csv(const fs::path& csv, PlotKind kind) {
  const Layout layout = layout_for(kind);
  const Columns c = read_columns(csv, layout);
  PlotSummary p;
  p.kind = kind;
  p.source = csv.string();
  p.x_column = layout.x;
  p.rows = c.x.size();
  for (std::size_t s = 0; s < layout.ys.size(); ++s) p.series[layout.ys[s]] = stats(c.ys[s]);
  if (kind == PlotKind::kInpaintTrace) {
    double m = 0.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) m = std::max(m, std::abs(c.ys[2][i] - c.ys[0][i]));
    p.max_abs_total_minus_contextual = m;
  }
  return p;
}

fs::path summary_path_for(const fs::path& out_png) {
  fs::path p = out_png;
  p.replace_extension(".summary.json");
  return p;
}

fs::path emit_plot(const fs::path& csv, const fs::path& out_png, PlotKind kind) {
  const PlotSummary summary = summarize_csv(csv, kind);
  render(read_columns(csv, layout_for(kind)), out_png);
  const fs::path sp = summary_path_for(out_png);
  write_file_atomic(sp, summary.to_json().dump(2) + "\n");
  return sp;
}

}  // namespace inpaint_lab::experiment
