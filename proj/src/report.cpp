#include "ergoseg/report.hpp"

#include <cmath>
#include <cstdio>

#include "ergoseg/error.hpp"
#include "ergoseg/labels.hpp"

namespace ergoseg {

namespace {

constexpr int kWidth = 1000;
constexpr int kBarHeight = 40;
constexpr int kGap = 8;

// Golden-angle hue stepping keeps neighbouring class ids distinguishable.
void class_rgb(int class_id, int* r, int* g, int* b) {
  const double hue = static_cast<double>((class_id * 137) % 360);
  const double s = 0.65, v = 0.9;
  const double c = v * s;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::abs(hp - 2.0 * static_cast<int>(hp / 2.0) - 1.0));
  double rf = 0, gf = 0, bf = 0;
  switch (static_cast<int>(hp)) {
    case 0: rf = c; gf = x; break;
    case 1: rf = x; gf = c; break;
    case 2: gf = c; bf = x; break;
    case 3: gf = x; bf = c; break;
    case 4: rf = x; bf = c; break;
    default: rf = c; bf = x; break;
  }
  const double m = v - c;
  *r = static_cast<int>((rf + m) * 255.0);
  *g = static_cast<int>((gf + m) * 255.0);
  *b = static_cast<int>((bf + m) * 255.0);
}

void append_rect(std::string& out, double x, double y, double w, double h,
                 const std::string& fill) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "  <rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%d\" "
                "fill=\"%s\"/>\n",
                x, y, w, static_cast<int>(h), fill.c_str());
  out += buf;
}

void append_bar(std::string& out, const std::vector<int>& frames, double y) {
  const SegmentRun runs = run_length_encode(frames);
  const double scale = static_cast<double>(kWidth) / static_cast<double>(frames.size());
  double pos = 0.0;
  for (const auto& [id, length] : runs.runs) {
    append_rect(out, pos * scale, y, static_cast<double>(length) * scale,
                kBarHeight, class_color(id));
    pos += static_cast<double>(length);
  }
}

const char* risk_color(RiskCategory category) {
  switch (category) {
    case RiskCategory::low: return "#2ca02c";
    case RiskCategory::medium: return "#ffbf00";
    case RiskCategory::high: return "#d62728";
  }
  return "#000000";
}

}  // namespace

std::string class_color(int class_id) {
  int r, g, b;
  class_rgb(class_id, &r, &g, &b);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string render_timeline_svg(
    const std::vector<int>& truth, const std::vector<int>& pred,
    const std::optional<std::vector<RiskCategory>>& risk) {
  if (truth.size() != pred.size() || truth.empty())
    fail(Errc::length_mismatch,
         "truth and prediction must be equal-length and non-empty");
  if (risk && risk->size() != pred.size())
    fail(Errc::length_mismatch, "risk track length differs from frames");

  const int bars = risk ? 3 : 2;
  const int height = bars * kBarHeight + (bars - 1) * kGap;
  char header[160];
  std::snprintf(header, sizeof(header),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                kWidth, height, kWidth, height);
  std::string out = header;
  append_bar(out, truth, 0.0);
  append_bar(out, pred, kBarHeight + kGap);
  if (risk) {
    const double y = 2.0 * (kBarHeight + kGap);
    const double scale = static_cast<double>(kWidth) / static_cast<double>(pred.size());
    std::size_t start = 0;
    for (std::size_t f = 1; f <= risk->size(); ++f) {
      if (f == risk->size() || (*risk)[f] != (*risk)[start]) {
        append_rect(out, static_cast<double>(start) * scale, y,
                    static_cast<double>(f - start) * scale, kBarHeight,
                    risk_color((*risk)[start]));
        start = f;
      }
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ergoseg
