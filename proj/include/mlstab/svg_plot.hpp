#pragma once

// Hand-rolled SVG line plots: one polyline per solution component, plus one
// dashed polyline per component for the decay envelope when a certificate
// is supplied. Output is deterministic: fixed canvas, %.6g coordinates.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <mlstab/io.hpp>
#include <mlstab/solver.hpp>
#include <mlstab/stability_certificate.hpp>

namespace mlstab {
namespace detail {

inline std::string format_coord(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline const char* plot_color(int i) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#8c564b"};
  return kPalette[i % 6];
}

}  // namespace detail

/// Writes the trajectory (and optionally its certified envelope) as a
/// self-contained SVG. Curves are downsampled to at most ~800 vertices.
inline void write_plot_svg(const std::filesystem::path& path,
                           const Trajectory& traj,
                           const std::optional<Certificate>& cert = std::nullopt) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 64.0;
  constexpr double kRight = 24.0;
  constexpr double kTop = 24.0;
  constexpr double kBottom = 48.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  const std::size_t stride = std::max<std::size_t>(1, traj.rows() / 800);
  std::vector<std::size_t> picks;
  for (std::size_t n = 0; n < traj.rows(); n += stride) picks.push_back(n);
  if (picks.back() != traj.rows() - 1) picks.push_back(traj.rows() - 1);

  const double t_min = traj.times.front();
  const double t_max = traj.times.back();
  double y_min = 0.0;
  double y_max = 0.0;
  for (std::size_t n : picks) {
    for (int i = 0; i < traj.dim; ++i) {
      y_min = std::min(y_min, traj.states[n * traj.dim + i]);
      y_max = std::max(y_max, traj.states[n * traj.dim + i]);
    }
  }
  if (cert) {
    const auto top = envelope(*cert, std::max(t_min, 0.0));
    for (double e : top) y_max = std::max(y_max, e);
  }
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_max += y_pad;
  y_min -= y_pad;
  const double t_span = std::max(t_max - t_min, 1e-12);

  const auto x_of = [&](double t) {
    return kLeft + plot_w * (t - t_min) / t_span;
  };
  const auto y_of = [&](double y) {
    return kTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min));
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double t = t_min + t_span * k / 4.0;
    const double x = x_of(t);
    svg += "<line x1=\"" + detail::format_coord(x) + "\" y1=\"" +
           detail::format_coord(kTop) + "\" x2=\"" + detail::format_coord(x) +
           "\" y2=\"" + detail::format_coord(kTop + plot_h) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::format_coord(x) + "\" y=\"" +
           detail::format_coord(kHeight - 28.0) +
           "\" text-anchor=\"middle\">" + detail::format_coord(t) +
           "</text>\n";
    const double y = y_min + (y_max - y_min) * k / 4.0;
    const double ypx = y_of(y);
    svg += "<line x1=\"" + detail::format_coord(kLeft) + "\" y1=\"" +
           detail::format_coord(ypx) + "\" x2=\"" +
           detail::format_coord(kLeft + plot_w) + "\" y2=\"" +
           detail::format_coord(ypx) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::format_coord(kLeft - 6.0) + "\" y=\"" +
           detail::format_coord(ypx + 4.0) + "\" text-anchor=\"end\">" +
           detail::format_coord(y) + "</text>\n";
  }
  svg += "<rect x=\"" + detail::format_coord(kLeft) + "\" y=\"" +
         detail::format_coord(kTop) + "\" width=\"" +
         detail::format_coord(plot_w) + "\" height=\"" +
         detail::format_coord(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + detail::format_coord(kLeft + plot_w / 2.0) +
         "\" y=\"" + detail::format_coord(kHeight - 8.0) +
         "\" text-anchor=\"middle\">t</text>\n";

  const auto polyline = [&](int i, bool env_curve) {
    std::string points;
    for (std::size_t n : picks) {
      const double t = traj.times[n];
      const double y = env_curve ? envelope(*cert, std::max(t, 0.0))[i]
                                 : traj.states[n * traj.dim + i];
      points += detail::format_coord(x_of(t)) + "," +
                detail::format_coord(y_of(y)) + " ";
    }
    if (!points.empty()) points.pop_back();
    std::string out = "<polyline class=\"";
    out += env_curve ? "envelope" : "solution";
    out += "\" fill=\"none\" stroke=\"";
    out += detail::plot_color(i);
    out += "\"";
    if (env_curve) out += " stroke-dasharray=\"6 4\" opacity=\"0.7\"";
    out += " stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    return out;
  };

  for (int i = 0; i < traj.dim; ++i) svg += polyline(i, false);
  if (cert) {
    for (int i = 0; i < traj.dim; ++i) svg += polyline(i, true);
  }

  double legend_y = kTop + 16.0;
  for (int i = 0; i < traj.dim; ++i) {
    svg += "<text x=\"" + detail::format_coord(kLeft + plot_w - 110.0) +
           "\" y=\"" + detail::format_coord(legend_y) + "\" fill=\"" +
           detail::plot_color(i) + "\">w_" + std::to_string(i + 1);
    if (cert) svg += " / envelope";
    svg += "</text>\n";
    legend_y += 16.0;
  }
  svg += "</svg>\n";
  detail::atomic_write(path, svg);
}

}  // namespace mlstab
