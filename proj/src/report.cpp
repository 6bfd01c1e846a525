#include "shapefit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "shapefit/io.hpp"
#include "shapefit/random.hpp"

namespace shapefit {

namespace {

using nlohmann::json;

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

// Gray level for a mean error: 255 at 0, 0 at 1 or above.
int gray_level(double mean) {
  if (!std::isfinite(mean)) return 0;
  return static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(mean, 0.0, 1.0))));
}

void svg_open(std::ostream& os, int width, int height, const ExperimentResult& result, std::string_view title) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<title>" << xml_escape(title) << "</title>\n"
     << "<metadata>" << xml_escape(to_json(result.config).dump()) << "</metadata>\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" style=\"fill:#ffffff\"/>\n";
}

std::string phase_grid_svg(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  std::map<std::pair<int, double>, double> means;
  for (const CellSummary& c : result.summarize()) means[{c.n, c.q}] = c.mean_error;

  const int cell_w = 44;
  const int cell_h = 30;
  const int left = 60;
  const int top = 40;
  const int cols = static_cast<int>(cfg.q_values.size());
  const int rows = static_cast<int>(cfg.n_values.size());
  const int width = left + cols * cell_w + 110;
  const int height = top + rows * cell_h + 60;

  std::ostringstream os;
  svg_open(os, width, height, result, "Mean relative error over (n, q)");
  os << "<text x=\"" << left << "\" y=\"22\" style=\"font-size:14px\">Mean relative error, sigma = "
     << fmt(cfg.sigma) << ", p = " << fmt(cfg.p) << ", d = " << cfg.d << ", " << cfg.trials
     << " trials</text>\n";
  // Largest n on top.
  for (int r = 0; r < rows; ++r) {
    const int n = cfg.n_values[rows - 1 - r];
    const int y = top + r * cell_h;
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + cell_h / 2 + 4 << "\" text-anchor=\"end\">" << n
       << "</text>\n";
    for (int c = 0; c < cols; ++c) {
      const double mean = means.at({n, cfg.q_values[c]});
      const int g = gray_level(mean);
      const int x = left + c * cell_w;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
         << "\" style=\"fill:rgb(" << g << ',' << g << ',' << g << ");stroke:#808080;stroke-width:0.5\">"
         << "<title>n=" << n << " q=" << fmt(cfg.q_values[c]) << " mean=" << fmt(mean) << "</title></rect>\n";
      if (!std::isfinite(mean)) {
        os << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + cell_w << "\" y2=\"" << y + cell_h
           << "\" style=\"stroke:#ff0000;stroke-width:1\"/>\n";
      }
    }
  }
  const int axis_y = top + rows * cell_h;
  for (int c = 0; c < cols; ++c) {
    os << "<text x=\"" << left + c * cell_w + cell_w / 2 << "\" y=\"" << axis_y + 16 << "\" text-anchor=\"middle\">"
       << fmt(cfg.q_values[c], 3) << "</text>\n";
  }
  os << "<text x=\"" << left + cols * cell_w / 2 << "\" y=\"" << axis_y + 38
     << "\" text-anchor=\"middle\">corruption probability q</text>\n"
     << "<text x=\"16\" y=\"" << top + rows * cell_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + rows * cell_h / 2 << ")\">n</text>\n";

  // Legend: ten gray steps from 0 (white) to 1 (black).
  const int lx = left + cols * cell_w + 30;
  for (int k = 0; k <= 10; ++k) {
    const int g = gray_level(k / 10.0);
    os << "<rect x=\"" << lx << "\" y=\"" << top + k * 14 << "\" width=\"20\" height=\"14\" style=\"fill:rgb(" << g
       << ',' << g << ',' << g << ");stroke:#808080;stroke-width:0.5\"/>\n";
  }
  os << "<text x=\"" << lx + 26 << "\" y=\"" << top + 11 << "\">0</text>\n"
     << "<text x=\"" << lx + 26 << "\" y=\"" << top + 10 * 14 + 11 << "\">&#8805;1</text>\n"
     << "</svg>\n";
  return os.str();
}

std::string noise_sweep_svg(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  std::vector<std::pair<double, double>> pts;
  std::vector<std::string> controls;
  for (const CellSummary& c : result.summarize()) {
    if (c.sigma > 0.0 && c.mean_error > 0.0 && std::isfinite(c.mean_error)) {
      pts.emplace_back(std::log10(c.sigma), std::log10(c.mean_error));
    } else {
      controls.push_back("sigma=" + fmt(c.sigma) + ": mean error " + fmt(c.mean_error));
    }
  }

  const int left = 70;
  const int top = 40;
  const int plot_w = 420;
  const int plot_h = 300;
  const int width = left + plot_w + 30;
  const int height = top + plot_h + 70 + 16 * static_cast<int>(controls.size());

  double x0 = -6, x1 = 0, y0 = -6, y1 = 0;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  x0 = std::floor(x0);
  x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0);
  y1 = std::max(std::ceil(y1), y0 + 1);
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
  const auto py = [&](double y) { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; };

  std::ostringstream os;
  svg_open(os, width, height, result, "Mean relative error against noise level");
  os << "<text x=\"" << left << "\" y=\"22\" style=\"font-size:14px\">Mean relative error, n = "
     << cfg.n_values.front() << ", q = " << fmt(cfg.q_values.front()) << ", p = " << fmt(cfg.p) << ", "
     << cfg.trials << " trials</text>\n"
     << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" style=\"fill:none;stroke:#000000;stroke-width:1\"/>\n";
  for (int e = static_cast<int>(x0); e <= static_cast<int>(x1); ++e) {
    os << "<line x1=\"" << px(e) << "\" y1=\"" << top << "\" x2=\"" << px(e) << "\" y2=\"" << top + plot_h
       << "\" style=\"stroke:#dddddd;stroke-width:1\"/>\n"
       << "<text x=\"" << px(e) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">1e" << e
       << "</text>\n";
  }
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(e) << "\" x2=\"" << left + plot_w << "\" y2=\"" << py(e)
       << "\" style=\"stroke:#dddddd;stroke-width:1\"/>\n"
       << "<text x=\"" << left - 6 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  if (!pts.empty()) {
    os << "<polyline style=\"fill:none;stroke:#000000;stroke-width:1.5\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      os << (k ? " " : "") << px(pts[k].first) << ',' << py(pts[k].second);
    }
    os << "\"/>\n";
    for (const auto& [x, y] : pts) {
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" style=\"fill:#000000\"/>\n";
    }
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h + 36
     << "\" text-anchor=\"middle\">noise level sigma</text>\n"
     << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << top + plot_h / 2 << ")\">mean relative error</text>\n";
  for (std::size_t k = 0; k < controls.size(); ++k) {
    os << "<text x=\"" << left << "\" y=\"" << top + plot_h + 58 + 16 * static_cast<int>(k) << "\">"
       << xml_escape(controls[k]) << " (not on log axes)</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string file_stem(const ExperimentConfig& cfg) { return std::string(to_string(cfg.mode)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string experiment_csv(const ExperimentResult& result) {
  std::ostringstream os;
  const bool grid = result.config.mode == ExperimentMode::phase_grid;
  os << (grid ? "n,q,sigma,trial,seed,relative_error,iterations,status\r\n" : "sigma,trial,seed,relative_error\r\n");
  for (const TrialRecord& r : result.records) {
    if (grid) {
      os << r.n << ',' << format_real(r.q) << ',' << format_real(r.sigma) << ',' << r.trial << ',' << r.seed << ','
         << format_real(r.relative_error) << ',' << r.iterations << ',' << to_string(r.status) << "\r\n";
    } else {
      os << format_real(r.sigma) << ',' << r.trial << ',' << r.seed << ',' << format_real(r.relative_error) << "\r\n";
    }
  }
  return os.str();
}

std::string experiment_svg(const ExperimentResult& result) {
  return result.config.mode == ExperimentMode::phase_grid ? phase_grid_svg(result) : noise_sweep_svg(result);
}

json experiment_manifest(const ExperimentResult& result) {
  const std::string stem = file_stem(result.config);
  json cells = json::array();
  const std::vector<CellSummary> summary = result.summarize();
  for (const CellSummary& c : summary) {
    cells.push_back({{"n", c.n},
                     {"q", c.q},
                     {"sigma", c.sigma},
                     {"mean_relative_error", std::isfinite(c.mean_error) ? json(c.mean_error) : json(nullptr)},
                     {"trials", c.trials},
                     {"refused", c.refused}});
  }
  json manifest = {{"config", to_json(result.config)},
                   {"rng", std::string(kRngAlgorithm)},
                   {"solver_tolerance", {{"primal", result.config.solver.tol_primal},
                                         {"dual", result.config.solver.tol_dual}}},
                   {"files", {{"csv", stem + ".csv"}, {"svg", stem + ".svg"}}},
                   {"cells", std::move(cells)}};
  if (result.config.mode == ExperimentMode::noise_sweep) {
    try {
      manifest["loglog_slope_1e-4_to_1e-1"] = loglog_slope(summary, 1e-4, 1e-1);
    } catch (const InvalidInputError&) {
      manifest["loglog_slope_1e-4_to_1e-1"] = nullptr;
    }
  }
  return manifest;
}

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result) {
  const std::filesystem::path dir = result.config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string stem = file_stem(result.config);
  const std::vector<std::filesystem::path> paths = {dir / (stem + ".csv"), dir / (stem + ".svg"),
                                                    dir / (stem + ".json")};
  write_text(paths[0], experiment_csv(result));
  write_text(paths[1], experiment_svg(result));
  write_text(paths[2], experiment_manifest(result).dump(2) + "\n");
  return paths;
}

}  // namespace shapefit
