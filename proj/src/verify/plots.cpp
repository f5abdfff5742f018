#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mocsim/error.hpp"
#include "mocsim/verify.hpp"

namespace mocsim::verify {
namespace {

constexpr std::size_t kMaxPoints = 2000;
constexpr double kWidth = 640, kHeight = 420, kMargin = 56;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

// Row indices to draw: every stride-th row plus the last one.
std::vector<std::size_t> sample_rows(std::size_t rows) {
  std::vector<std::size_t> out;
  const std::size_t stride = std::max<std::size_t>(1, (rows + kMaxPoints - 1) / kMaxPoints);
  for (std::size_t r = 0; r < rows; r += stride) out.push_back(r);
  if (out.back() != rows - 1) out.push_back(rows - 1);
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::pair<double, double>> steps(const TrajectoryLog& log, const std::vector<std::uint8_t>& bits,
                                             double offset) {
  std::vector<std::pair<double, double>> pts;
  const double t0 = static_cast<double>(log.t_ms.front());
  pts.emplace_back(t0, offset + bits.front());
  for (std::size_t r = 1; r < bits.size(); ++r) {
    if (bits[r] == bits[r - 1]) continue;
    const double t = static_cast<double>(log.t_ms[r]);
    pts.emplace_back(t, offset + bits[r - 1]);
    pts.emplace_back(t, offset + bits[r]);
  }
  pts.emplace_back(static_cast<double>(log.t_ms.back()), offset + bits.back());
  return pts;
}

}  // namespace

std::vector<Plot> build_plots(const TrajectoryLog& log) {
  if (log.rows() == 0) throw Error(ErrorCode::EmptyLog, "cannot plot an empty log");
  const auto rows = sample_rows(log.rows());
  std::vector<Plot> plots;
  for (std::size_t c = 0; c < log.axes.size(); ++c) {
    Plot p;
    const std::string id = std::to_string(log.axes[c]);
    p.file_name = "axis_" + id + ".svg";
    p.kind = PlotKind::Time;
    p.title = "Axis " + id + " position";
    p.x_label = "t [ms]";
    p.y_label = "position";
    p.axes = {log.axes[c]};
    Polyline line{"ax" + id, {}};
    for (auto r : rows) line.points.emplace_back(static_cast<double>(log.t_ms[r]), log.positions[c][r]);
    p.series.push_back(std::move(line));
    plots.push_back(std::move(p));
  }
  for (std::size_t c = 0; c + 1 < log.axes.size(); ++c) {
    Plot p;
    const std::string x = std::to_string(log.axes[c]), y = std::to_string(log.axes[c + 1]);
    p.file_name = "xy_" + x + "_" + y + ".svg";
    p.kind = PlotKind::XY;
    p.title = "Axes " + x + " / " + y;
    p.x_label = "ax" + x;
    p.y_label = "ax" + y;
    p.axes = {log.axes[c], log.axes[c + 1]};
    Polyline line{"path", {}};
    for (auto r : rows) line.points.emplace_back(log.positions[c][r], log.positions[c + 1][r]);
    p.series.push_back(std::move(line));
    plots.push_back(std::move(p));
  }
  if (log.axes.size() >= 3) {
    Plot p;
    const std::string x = std::to_string(log.axes[0]), y = std::to_string(log.axes[1]),
                      z = std::to_string(log.axes[2]);
    p.file_name = "iso_" + x + "_" + y + "_" + z + ".svg";
    p.kind = PlotKind::Isometric;
    p.title = "Axes " + x + " / " + y + " / " + z + " (isometric)";
    p.axes = {log.axes[0], log.axes[1], log.axes[2]};
    const double cos30 = std::sqrt(3.0) / 2.0;
    Polyline line{"path", {}};
    for (auto r : rows) {
      const double px = log.positions[0][r], py = log.positions[1][r], pz = log.positions[2][r];
      line.points.emplace_back((px - py) * cos30, pz + (px + py) * 0.5);
    }
    p.series.push_back(std::move(line));
    plots.push_back(std::move(p));
  }
  if (!log.inputs.empty() || !log.outputs.empty()) {
    Plot p;
    p.file_name = "io.svg";
    p.kind = PlotKind::IO;
    p.title = "Digital I/O";
    p.x_label = "t [ms]";
    p.y_label = "bit (stacked)";
    double offset = 0.0;
    for (std::size_t k = 0; k < log.inputs.size(); ++k, offset += 1.5)
      p.series.push_back({"in" + std::to_string(log.inputs[k]), steps(log, log.input_bits[k], offset)});
    for (std::size_t k = 0; k < log.outputs.size(); ++k, offset += 1.5)
      p.series.push_back({"out" + std::to_string(log.outputs[k]), steps(log, log.output_bits[k], offset)});
    plots.push_back(std::move(p));
  }
  return plots;
}

std::string render_svg(const Plot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) x0 -= 1.0, x1 += 1.0;
  if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
  const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  // Geometric plots keep equal scales so circles stay round.
  if (plot.kind == PlotKind::XY || plot.kind == PlotKind::Isometric) sx = sy = std::min(sx, sy);
  auto px = [&](double x) { return kMargin + (x - x0) * sx; };
  auto py = [&](double y) { return kHeight - kMargin - (y - y0) * sy; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
         fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " + fixed(kHeight, 0) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(kWidth / 2, 1) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(plot.title) + "</text>\n";
  svg += "<rect x=\"" + fixed(kMargin, 1) + "\" y=\"" + fixed(kMargin, 1) + "\" width=\"" + fixed(pw, 1) + "\" height=\"" +
         fixed(ph, 1) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    svg += "<text x=\"" + fixed(x, 1) + "\" y=\"" + fixed(y, 1) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(text) + "</text>\n";
  };
  label(kMargin, kHeight - kMargin + 16, fixed(x0, 3), "start");
  label(kWidth - kMargin, kHeight - kMargin + 16, fixed(x1, 3), "end");
  label(kMargin - 4, kHeight - kMargin, fixed(y0, 3), "end");
  label(kMargin - 4, kMargin + 10, fixed(y1, 3), "end");
  if (!plot.x_label.empty()) label(kWidth / 2, kHeight - 14, plot.x_label, "middle");
  if (!plot.y_label.empty()) label(14, kHeight / 2, plot.y_label, "start");

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(color) + "\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) svg += ' ';
      svg += fixed(px(s.points[i].first), 2) + "," + fixed(py(s.points[i].second), 2);
    }
    svg += "\"><title>" + escape(s.label) + "</title></polyline>\n";
    if (plot.kind == PlotKind::IO && !s.points.empty())
      label(kWidth - kMargin + 4, py(1.5 * static_cast<double>(k)), s.label, "start");
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_plots(const TrajectoryLog& log, const std::filesystem::path& dir) {
  const auto plots = build_plots(log);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& plot : plots) {
    const auto path = dir / plot.file_name;
    std::ofstream file(path, std::ios::binary);
    const std::string text = render_svg(plot);
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace mocsim::verify
