#pragma once

// Minimal SVG writer shared by the report emitters. Not installed.

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace lagcast::svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Linear ramp: -1 -> blue (#2166ac), 0 -> white, +1 -> red (#b2182b).
inline std::string diverging_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  auto mix = [](int from, int to, double t) { return static_cast<int>(from + (to - from) * t + 0.5); };
  int r, g, b;
  if (v < 0) {
    const double t = -v;
    r = mix(255, 0x21, t), g = mix(255, 0x66, t), b = mix(255, 0xac, t);
  } else {
    r = mix(255, 0xb2, v), g = mix(255, 0x18, v), b = mix(255, 0x2b, v);
  }
  return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

class Document {
 public:
  Document(int width, int height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
    body_ += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="{}")", x, y, w, h, fill);
    if (!stroke.empty()) body_ += fmt::format(R"( stroke="{}")", stroke);
    body_ += "/>\n";
  }

  void text(double x, double y, std::string_view content, int size, std::string_view anchor,
            std::string_view fill = "#000000") {
    body_ += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-family="sans-serif" font-size="{}" text-anchor="{}" fill="{}">{}</text>)",
                         x, y, size, anchor, fill, escape(content));
    body_ += '\n';
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0) {
    body_ += fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="{}" stroke-width="{:.2f}"/>)", x1, y1,
                         x2, y2, stroke, width);
    body_ += '\n';
  }

  void polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width = 1.5) {
    body_ += R"(<polyline fill="none" stroke=")";
    body_ += stroke;
    body_ += fmt::format(R"(" stroke-width="{:.2f}" points=")", width);
    for (std::size_t i = 0; i < points.size(); ++i)
      body_ += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", points[i].first, points[i].second);
    body_ += "\"/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{:.2f}" fill="{}"/>)", cx, cy, r, fill);
    body_ += '\n';
  }

  std::string str() const {
    return fmt::format(
        R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)"
        "\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{}</svg>\n",
        width_, height_, width_, height_, body_);
  }

 private:
  int width_;
  int height_;
  std::string body_;
};

}  // namespace lagcast::svg
