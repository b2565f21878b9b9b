#include "scree_svg.hpp"

#include <algorithm>
#include <cstdio>

namespace riskrfe::tools {

namespace {

constexpr double kWidth = 640, kHeight = 400, kMargin = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_scree_svg(const Vector& scree, const ChangePointFit& fit, const std::string& title) {
  const Index len = scree.size();
  const double x_max = std::max<double>(1.0, static_cast<double>(len - 1));
  double y_lo = scree.minCoeff(), y_hi = scree.maxCoeff();
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double x) { return kMargin + x / x_max * (kWidth - 2 * kMargin); };
  auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };
  auto clamp_y = [&](double y) { return std::clamp(y, y_lo, y_hi); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<!-- risk_rfe scree renderer 0.1.0 -->\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         title + "</text>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" + num(kWidth - kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) + "\" y2=\"" +
         num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">cycle</text>\n";

  const Index t = fit.change_index;
  const auto& l = fit.left_coeffs;
  svg += "<line class=\"left-fit\" x1=\"" + num(px(0)) + "\" y1=\"" + num(py(clamp_y(l[0]))) + "\" x2=\"" +
         num(px(static_cast<double>(t))) + "\" y2=\"" + num(py(clamp_y(l[0] + l[1] * static_cast<double>(t)))) +
         "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";

  const auto& r = fit.right_coeffs;
  std::string points;
  constexpr int kSamples = 64;
  const double x0 = static_cast<double>(t + 1), x1 = static_cast<double>(len - 1);
  for (int s = 0; s <= kSamples; ++s) {
    const double x = x0 + (x1 - x0) * s / kSamples;
    points += num(px(x)) + "," + num(py(clamp_y(r[0] + r[1] * x + r[2] * x * x))) + " ";
  }
  svg += "<polyline class=\"right-fit\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"2\" points=\"" + points +
         "\"/>\n";

  for (Index k = 0; k < len; ++k) {
    const bool change = k == t;
    svg += "<circle cx=\"" + num(px(static_cast<double>(k))) + "\" cy=\"" + num(py(scree[k])) + "\" r=\"" +
           (change ? "6" : "3") + "\" fill=\"black\"" + (change ? " class=\"change-point\"" : "") + "/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace riskrfe::tools
