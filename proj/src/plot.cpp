#include "maem/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "maem/config.hpp"
#include "maem/trainer.hpp"

namespace maem {

namespace {

struct Extent {
  double lo = 0.0, hi = 1.0;
  double map(double v, double pix_lo, double pix_hi) const {
    const double t = (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

Extent extent_of(const std::vector<double>& vals, double pad_frac = 0.08) {
  Extent e;
  if (vals.empty()) return e;
  e.lo = *std::min_element(vals.begin(), vals.end());
  e.hi = *std::max_element(vals.begin(), vals.end());
  if (e.hi - e.lo < 1e-9) {
    e.lo -= 1.0;
    e.hi += 1.0;
  }
  const double pad = (e.hi - e.lo) * pad_frac;
  e.lo -= pad;
  e.hi += pad;
  return e;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_scatter_svg(const std::vector<std::array<double, 2>>& samples,
                               const GaussianMixtureSpec& spec) {
  const double w = 640, h = 640, margin = 40;
  std::vector<double> xs, ys;
  for (const auto& s : samples) {
    xs.push_back(s[0]);
    ys.push_back(s[1]);
  }
  for (const auto& m : spec.means) {
    xs.push_back(m[0]);
    ys.push_back(m[1]);
  }
  Extent ex = extent_of(xs), ey = extent_of(ys);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto px = [&](double v) { return ex.map(v, margin, w - margin); };
  // SVG y-axis grows downward.
  auto py = [&](double v) { return ey.map(v, h - margin, margin); };

  // Cap the rendered sample count; the full set is in samples_final.csv.
  const std::size_t stride = std::max<std::size_t>(1, samples.size() / 5000);
  for (std::size_t i = 0; i < samples.size(); i += stride) {
    os << "<circle cx=\"" << num(px(samples[i][0])) << "\" cy=\""
       << num(py(samples[i][1]))
       << "\" r=\"1.5\" fill=\"#4878cf\" fill-opacity=\"0.5\"/>\n";
  }
  for (const auto& m : spec.means) {
    const double cx = px(m[0]), cy = py(m[1]);
    // 3-sigma ring of each mode, scaled into pixel space on the x axis.
    const double r_pix = std::fabs(px(m[0] + 3.0 * spec.sigma) - cx);
    os << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\""
       << num(std::max(r_pix, 4.0))
       << "\" fill=\"none\" stroke=\"#d1342f\" stroke-width=\"1.5\"/>\n"
       << "<line x1=\"" << num(cx - 4) << "\" y1=\"" << num(cy) << "\" x2=\""
       << num(cx + 4) << "\" y2=\"" << num(cy)
       << "\" stroke=\"#d1342f\" stroke-width=\"1\"/>\n"
       << "<line x1=\"" << num(cx) << "\" y1=\"" << num(cy - 4) << "\" x2=\""
       << num(cx) << "\" y2=\"" << num(cy + 4)
       << "\" stroke=\"#d1342f\" stroke-width=\"1\"/>\n";
  }
  os << "<text x=\"" << margin << "\" y=\"" << h - 10
     << "\" font-size=\"12\" fill=\"#444\">x: [" << num(ex.lo) << ", " << num(ex.hi)
     << "]  y: [" << num(ey.lo) << ", " << num(ey.hi) << "]  samples: "
     << samples.size() << "</text>\n</svg>\n";
  return os.str();
}

std::string render_metrics_svg(const std::vector<MetricsRecord>& records) {
  struct Series {
    const char* label;
    std::vector<double> values;
  };
  std::vector<Series> series = {{"mode_coverage", {}},
                                {"high_quality_ratio", {}},
                                {"i_variance", {}},
                                {"embedding_entropy_nats", {}}};
  std::vector<double> steps;
  for (const auto& r : records) {
    steps.push_back(static_cast<double>(r.step));
    series[0].values.push_back(static_cast<double>(r.mode_coverage));
    series[1].values.push_back(r.high_quality_ratio);
    series[2].values.push_back(r.i_variance);
    series[3].values.push_back(r.embedding_entropy_nats);
  }

  const double panel_w = 620, panel_h = 150, margin = 50, gap = 16;
  const double w = panel_w + 2 * margin;
  const double h = margin + series.size() * (panel_h + gap) + margin;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  Extent ex = extent_of(steps, 0.02);
  for (std::size_t p = 0; p < series.size(); ++p) {
    const double top = margin + static_cast<double>(p) * (panel_h + gap);
    const double bot = top + panel_h;
    Extent ey = extent_of(series[p].values, 0.1);
    os << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\"" << panel_w
       << "\" height=\"" << panel_h
       << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    if (!steps.empty()) {
      os << "<polyline fill=\"none\" stroke=\"#4878cf\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < steps.size(); ++i) {
        os << num(ex.map(steps[i], margin, margin + panel_w)) << ','
           << num(ey.map(series[p].values[i], bot, top)) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << margin + 4 << "\" y=\"" << top + 14
       << "\" font-size=\"12\" fill=\"#444\">" << series[p].label << " ["
       << num(ey.lo) << ", " << num(ey.hi) << "]</text>\n";
  }
  os << "<text x=\"" << margin << "\" y=\"" << h - 14
     << "\" font-size=\"12\" fill=\"#444\">step: [" << num(ex.lo) << ", "
     << num(ex.hi) << "]</text>\n</svg>\n";
  return os.str();
}

PlotPaths plot_run(const std::string& run_dir) {
  const std::string samples_path = run_dir + "/samples_final.csv";
  const std::string metrics_path = run_dir + "/metrics.jsonl";
  const std::string config_path = run_dir + "/config.snapshot";

  std::ifstream samples_file(samples_path);
  if (!samples_file) throw std::runtime_error("plot: missing " + samples_path);
  std::ifstream metrics_file(metrics_path);
  if (!metrics_file) throw std::runtime_error("plot: missing " + metrics_path);

  TrainConfig cfg = load_config(config_path);
  GaussianMixtureSpec mixture = cfg.dataset.to_mixture();

  std::vector<std::array<double, 2>> samples;
  std::string line;
  while (std::getline(samples_file, line)) {
    if (line.empty()) continue;
    std::array<double, 2> pt{0.0, 0.0};
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < 2 && std::getline(ls, cell, ','); ++j) pt[static_cast<std::size_t>(j)] = std::stod(cell);
    samples.push_back(pt);
  }

  std::vector<MetricsRecord> records;
  while (std::getline(metrics_file, line)) {
    if (!line.empty()) records.push_back(metrics_record_from_json_line(line));
  }

  PlotPaths paths;
  paths.scatter_svg = run_dir + "/scatter.svg";
  paths.metrics_svg = run_dir + "/metrics.svg";
  {
    std::ofstream os(paths.scatter_svg, std::ios::trunc);
    if (!os) throw std::runtime_error("plot: cannot write " + paths.scatter_svg);
    os << render_scatter_svg(samples, mixture);
  }
  {
    std::ofstream os(paths.metrics_svg, std::ios::trunc);
    if (!os) throw std::runtime_error("plot: cannot write " + paths.metrics_svg);
    os << render_metrics_svg(records);
  }
  return paths;
}

}  // namespace maem
