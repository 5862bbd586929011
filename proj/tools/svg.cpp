#include "svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "dimsig/complexity.hpp"

namespace dimsig::plot {

namespace {

constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string px(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, end);
}

std::string escape(const std::string& s) {
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

const char* color(std::size_t i) { return kColors[i % std::size(kColors)]; }

struct Range {
  double lo = 0.0, hi = 1.0;

  void widen() {
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

// Maps data coordinates into the plotting frame.
struct Frame {
  Range x, y;

  double sx(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double sy(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string open_svg(const std::string& title, const std::string& kind) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
         "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\" data-kind=\"" + kind + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" + px(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + escape(title) +
         "</text>\n";
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string out;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x1) + "\" y2=\"" + px(y0) + "\"/>\n";
  out += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x0) + "\" y2=\"" + px(y1) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 4.0;
    out += "<text x=\"" + px(f.sx(xv)) + "\" y=\"" + px(y0 + 16) + "\" text-anchor=\"middle\">" +
           format_double(std::round(xv * 1000) / 1000) + "</text>\n";
    out += "<text x=\"" + px(x0 - 6) + "\" y=\"" + px(f.sy(yv) + 4) + "\" text-anchor=\"end\">" +
           format_double(std::round(yv * 1000) / 1000) + "</text>\n";
  }
  out += "</g>\n";
  out += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + px((y0 + y1) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(y_label) +
         "</text>\n";
  return out;
}

std::string legend(const std::vector<std::string>& names) {
  std::string out = "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 14.0 * static_cast<double>(i);
    out += "<rect x=\"" + px(kWidth - 170) + "\" y=\"" + px(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
           color(i) + "\"/>";
    out += "<text x=\"" + px(kWidth - 155) + "\" y=\"" + px(y) + "\">" + escape(names[i]) + "</text>\n";
  }
  return out + "</g>\n";
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  Frame f{{INFINITY, -INFINITY}, {INFINITY, -INFINITY}};
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      f.x.lo = std::min(f.x.lo, x), f.x.hi = std::max(f.x.hi, x);
      f.y.lo = std::min(f.y.lo, y), f.y.hi = std::max(f.y.hi, y);
    }
  }
  if (!std::isfinite(f.x.lo)) f = Frame{};
  f.x.widen();
  f.y.widen();

  std::string out = open_svg(title, "line") + axes(f, x_label, y_label);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    names.push_back(s.name);
    out += "<g class=\"series\" data-name=\"" + escape(s.name) + "\" stroke=\"" + color(i) + "\" fill=\"" +
           color(i) + "\">\n<polyline fill=\"none\" points=\"";
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      if (j) out += ' ';
      out += px(f.sx(s.points[j].first)) + "," + px(f.sy(s.points[j].second));
    }
    out += "\"/>\n";
    for (const auto& [x, y] : s.points) {
      out += "<circle cx=\"" + px(f.sx(x)) + "\" cy=\"" + px(f.sy(y)) + "\" r=\"2\" data-x=\"" + format_double(x) +
             "\" data-y=\"" + format_double(y) + "\"/>\n";
    }
    out += "</g>\n";
  }
  return out + legend(names) + "</svg>\n";
}

std::string box_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Box>& boxes) {
  Frame f{{INFINITY, -INFINITY}, {INFINITY, -INFINITY}};
  for (const auto& b : boxes) {
    f.x.lo = std::min(f.x.lo, b.x), f.x.hi = std::max(f.x.hi, b.x);
    f.y.lo = std::min(f.y.lo, b.stats.min), f.y.hi = std::max(f.y.hi, b.stats.max);
  }
  if (!std::isfinite(f.x.lo)) f = Frame{};
  // Leave room for the outermost boxes.
  const double pad = boxes.size() > 1 ? (f.x.hi - f.x.lo) / (2.0 * static_cast<double>(boxes.size())) : 0.5;
  f.x.lo -= pad;
  f.x.hi += pad;
  f.y.widen();
  const double half = std::max(2.0, 0.35 * (f.sx(f.x.lo + 2 * pad) - f.sx(f.x.lo)));

  std::string out = open_svg(title, "box") + axes(f, x_label, y_label);
  out += "<g class=\"boxes\" stroke=\"#1f77b4\" fill=\"#aec7e8\">\n";
  for (const auto& b : boxes) {
    const Stats& s = b.stats;
    const double cx = f.sx(b.x);
    out += "<g class=\"box\" data-x=\"" + format_double(b.x) + "\" data-min=\"" + format_double(s.min) +
           "\" data-q1=\"" + format_double(s.q1) + "\" data-median=\"" + format_double(s.median) +
           "\" data-q3=\"" + format_double(s.q3) + "\" data-max=\"" + format_double(s.max) + "\" data-mean=\"" +
           format_double(s.mean) + "\">\n";
    out += "<line x1=\"" + px(cx) + "\" y1=\"" + px(f.sy(s.min)) + "\" x2=\"" + px(cx) + "\" y2=\"" +
           px(f.sy(s.max)) + "\"/>\n";
    out += "<rect x=\"" + px(cx - half) + "\" y=\"" + px(f.sy(s.q3)) + "\" width=\"" + px(2 * half) +
           "\" height=\"" + px(std::max(0.0, f.sy(s.q1) - f.sy(s.q3))) + "\"/>\n";
    out += "<line stroke=\"#d62728\" x1=\"" + px(cx - half) + "\" y1=\"" + px(f.sy(s.median)) + "\" x2=\"" +
           px(cx + half) + "\" y2=\"" + px(f.sy(s.median)) + "\"/>\n</g>\n";
  }
  return out + "</g>\n</svg>\n";
}

std::string histogram_chart(const std::string& title, const std::string& x_label, const std::vector<Bar>& bars,
                            double marker) {
  Frame f{{marker, marker}, {0.0, 1.0}};
  for (const auto& b : bars) {
    f.x.lo = std::min(f.x.lo, b.lo), f.x.hi = std::max(f.x.hi, b.hi);
    f.y.hi = std::max(f.y.hi, b.count);
  }
  f.x.widen();

  std::string out = open_svg(title, "histogram") + axes(f, x_label, "trials");
  out += "<g class=\"bars\" fill=\"#aec7e8\" stroke=\"#1f77b4\">\n";
  for (const auto& b : bars) {
    out += "<rect x=\"" + px(f.sx(b.lo)) + "\" y=\"" + px(f.sy(b.count)) + "\" width=\"" +
           px(f.sx(b.hi) - f.sx(b.lo)) + "\" height=\"" + px(f.sy(0) - f.sy(b.count)) + "\" data-lo=\"" +
           format_double(b.lo) + "\" data-hi=\"" + format_double(b.hi) + "\" data-count=\"" +
           format_double(b.count) + "\"/>\n";
  }
  out += "</g>\n<line class=\"marker\" stroke=\"#d62728\" stroke-width=\"2\" x1=\"" + px(f.sx(marker)) +
         "\" y1=\"" + px(f.sy(0)) + "\" x2=\"" + px(f.sx(marker)) + "\" y2=\"" + px(f.sy(f.y.hi)) +
         "\" data-value=\"" + format_double(marker) + "\"/>\n";
  return out + "</svg>\n";
}

std::string radar_chart(const std::string& title, const std::vector<std::string>& spokes,
                        const std::vector<RadarSeries>& series) {
  const double cx = kWidth / 2, cy = (kHeight + kTop) / 2, radius = (kHeight - kTop) / 2 - 30;
  const std::size_t n = spokes.size();
  auto angle = [&](std::size_t i) { return -std::numbers::pi / 2 + 2 * std::numbers::pi * i / std::max<std::size_t>(n, 1); };

  std::string out = open_svg(title, "radar");
  out += "<g class=\"spokes\" stroke=\"#cccccc\" font-family=\"sans-serif\" font-size=\"8\">\n";
  // Label every spoke when few, otherwise thin the labels out.
  const std::size_t label_step = std::max<std::size_t>(1, n / 48);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = angle(i);
    out += "<line x1=\"" + px(cx) + "\" y1=\"" + px(cy) + "\" x2=\"" + px(cx + radius * std::cos(a)) + "\" y2=\"" +
           px(cy + radius * std::sin(a)) + "\" data-spoke=\"" + escape(spokes[i]) + "\"/>\n";
    if (i % label_step == 0) {
      out += "<text stroke=\"none\" x=\"" + px(cx + (radius + 12) * std::cos(a)) + "\" y=\"" +
             px(cy + (radius + 12) * std::sin(a)) + "\" text-anchor=\"middle\">" + escape(spokes[i]) + "</text>\n";
    }
  }
  out += "</g>\n";
  std::vector<std::string> names;
  for (std::size_t s = 0; s < series.size(); ++s) {
    names.push_back(series[s].name);
    std::string pts, dots;
    for (std::size_t i = 0; i < n && i < series[s].values.size(); ++i) {
      const double v = series[s].values[i];
      const double x = cx + radius * v * std::cos(angle(i)), y = cy + radius * v * std::sin(angle(i));
      if (!pts.empty()) pts += ' ';
      pts += px(x) + "," + px(y);
      dots += "<circle cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"1.5\" data-spoke=\"" + escape(spokes[i]) +
              "\" data-value=\"" + format_double(v) + "\"/>\n";
    }
    out += "<g class=\"series\" data-name=\"" + escape(series[s].name) + "\" stroke=\"" + color(s) + "\" fill=\"" +
           color(s) + "\">\n<polygon fill=\"none\" points=\"" + pts + "\"/>\n" + dots + "</g>\n";
  }
  return out + legend(names) + "</svg>\n";
}

}  // namespace dimsig::plot
