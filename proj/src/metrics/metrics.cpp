#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/fsutil.hpp"

namespace inpaint_lab::metrics {

using nlohmann::json;

void SsimParams::validate() const {
  require(alpha > 0.0 && beta > 0.0 && gamma > 0.0, "ssim exponents must be > 0");
  require(k1 > 0.0 && k2 > 0.0, "ssim k1/k2 must be > 0");
  require(window >= 1 && window % 2 == 1, "ssim window must be odd and >= 1");
  require(std::isfinite(sigma) && sigma > 0.0, "ssim sigma must be > 0");
  require(dynamic_range > 0.0, "ssim dynamic range must be > 0");
}

json SsimParams::to_json() const {
  return {{"alpha", alpha}, {"beta", beta},     {"gamma", gamma},
          {"k1", k1},       {"k2", k2},         {"window", window},
          {"sigma", sigma}, {"dynamic_range", dynamic_range}, {"luma", "0.299R+0.587G+0.114B"}};
}

namespace {

void require_same_shape(const ImageU8& f, const ImageU8& g) {
  if (!(f.size() == g.size()))
    fail_validation("image shapes differ: " + std::to_string(f.height()) + "x" +
                    std::to_string(f.width()) + " vs " + std::to_string(g.height()) + "x" +
                    std::to_string(g.width()));
}

// Keeps the sign of a negative base for non-integer exponents.
double signed_pow(double base, double e) {
  if (e == 1.0) return base;
  return base < 0.0 ? -std::pow(-base, e) : std::pow(base, e);
}

}  // namespace

double mse(const ImageU8& f, const ImageU8& g) {
  require_same_shape(f, g);
  require(!f.empty(), "mse of empty images");
  std::uint64_t sum = 0;
  const auto& a = f.data();
  const auto& b = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
  if (m == 0.0) return kPsnrCapDb;
  return 20.0 * std::log10(255.0 / std::sqrt(m));
}

double psnr(const ImageU8& f, const ImageU8& g) { return psnr_from_mse(mse(f, g)); }

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  double total = 0.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dy = y - r, dx = x - r;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>(y) * size + x] = v;
      total += v;
    }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> luma(const ImageU8& image) {
  std::vector<double> out(static_cast<std::size_t>(image.height()) * image.width());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      out[static_cast<std::size_t>(y) * image.width() + x] =
          0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
  return out;
}

double ssim(const ImageU8& x, const ImageU8& y, const SsimParams& p) {
  p.validate();
  require_same_shape(x, y);
  const int h = x.height(), w = x.width(), k = p.window;
  if (h < k || w < k)
    fail_validation("ssim needs images of at least " + std::to_string(k) + "x" +
                    std::to_string(k) + ", got " + std::to_string(h) + "x" + std::to_string(w));
  const std::vector<double> win = gaussian_window(k, p.sigma);
  const std::vector<double> lx = luma(x), ly = luma(y);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const double c3 = c2 / 2.0;

  double total = 0.0;
  int count = 0;
  for (int oy = 0; oy + k <= h; ++oy) {
    for (int ox = 0; ox + k <= w; ++ox) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < k; ++i) {
        const std::size_t row = static_cast<std::size_t>(oy + i) * w + ox;
        for (int j = 0; j < k; ++j) {
          const double wt = win[static_cast<std::size_t>(i) * k + j];
          const double a = lx[row + j], b = ly[row + j];
          mx += wt * a;
          my += wt * b;
          sxx += wt * (a * a);
          syy += wt * (b * b);
          sxy += wt * (a * b);
        }
      }
      const double vx = std::max(sxx - mx * mx, 0.0);
      const double vy = std::max(syy - my * my, 0.0);
      const double cov = sxy - mx * my;
      const double sd = std::sqrt(vx * vy);
      const double l = (2.0 * (mx * my) + c1) / (mx * mx + my * my + c1);
      const double c = (2.0 * sd + c2) / (vx + vy + c2);
      const double s = (cov + c3) / (sd + c3);
      total += signed_pow(l, p.alpha) * signed_pow(c, p.beta) * signed_pow(s, p.gamma);
      ++count;
    }
  }
  return total / count;
}

Aggregate aggregate(std::vector<double> v) {
  Aggregate a;
  if (v.empty()) return a;
  double sum = 0.0;
  for (double x : v) sum += x;
  a.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - a.mean) * (x - a.mean);
  a.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  a.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  return a;
}

MetricsReport evaluate_set(const std::vector<NamedImage>& originals,
                           const std::vector<NamedImage>& completed, const SsimParams& params) {
  params.validate();
  if (originals.size() != completed.size())
    fail_validation("evaluate_set: " + std::to_string(originals.size()) + " originals vs " +
                    std::to_string(completed.size()) + " completed images");
  MetricsReport report;
  report.params = params;
  std::vector<double> ps, ss;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    MetricsRow row;
    row.id = originals[i].id;
    try {
      row.psnr_db = psnr(originals[i].image, completed[i].image);
      row.ssim = ssim(originals[i].image, completed[i].image, params);
      ps.push_back(row.psnr_db);
      ss.push_back(row.ssim);
      ++report.included;
    } catch (const ValidationError& e) {
      row.error = e.what();
      ++report.excluded;
    }
    report.rows.push_back(std::move(row));
  }
  report.psnr_db = aggregate(ps);
  report.ssim = aggregate(ss);
  return report;
}

json MetricsReport::to_json() const {
  json rows_j = json::array();
  json excluded_j = json::array();
  for (const auto& r : rows) {
    if (r.error)
      excluded_j.push_back({{"id", r.id}, {"error", *r.error}});
    else
      rows_j.push_back({{"id", r.id}, {"psnr_db", r.psnr_db}, {"ssim", r.ssim}});
  }
  auto agg = [](const Aggregate& a) {
    return json{{"mean", a.mean}, {"median", a.median}, {"std", a.stddev}};
  };
  return {{"rows", rows_j},
          {"excluded", excluded_j},
          {"included_count", included},
          {"excluded_count", excluded},
          {"aggregate", {{"psnr_db", agg(psnr_db)}, {"ssim", agg(ssim)}}},
          {"psnr_cap_db", kPsnrCapDb},
          {"ssim_params", params.to_json()},
          {"provenance",
           {{"originals", originals_source},
            {"completed", completed_source},
            {"config_sha256", config_sha256}}}};
}

std::string MetricsReport::to_csv() const {
  CsvTable t;
  t.header = {"id", "psnr_db", "ssim"};
  for (const auto& r : rows)
    if (!r.error) t.rows.push_back({r.id, format_real(r.psnr_db), format_real(r.ssim)});
  return t.to_string();
}

void MetricsReport::write(const fs::path& csv, const fs::path& json_path) const {
  write_file_atomic(csv, to_csv());
  write_file_atomic(json_path, to_json().dump(2) + "\n");
}

}  // namespace inpaint_lab::metrics
