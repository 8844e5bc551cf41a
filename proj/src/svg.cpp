#include <algorithm>
#include <cmath>
#include <sstream>

#include "ep3/io.hpp"

namespace ep3 {

namespace {

constexpr double kLeft = 70, kRight = 130, kTop = 40, kBottom = 55;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi, int width, int height)
    : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), width_(width), height_(height) {
  if (!(x_hi_ > x_lo_)) x_hi_ = x_lo_ + 1;
  if (!(y_hi_ > y_lo_)) y_hi_ = y_lo_ + 1;
}

double SvgPlot::px(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * (width_ - kLeft - kRight); }
double SvgPlot::py(double y) const { return height_ - kBottom - (y - y_lo_) / (y_hi_ - y_lo_) * (height_ - kTop - kBottom); }

void SvgPlot::title(const std::string& t) { title_ = t; }

void SvgPlot::axis_labels(const std::string& x, const std::string& y) {
  x_label_ = x;
  y_label_ = y;
}

void SvgPlot::cell(double x0, double x1, double y0, double y1, const std::string& color) {
  const double a = px(std::min(x0, x1)), b = px(std::max(x0, x1));
  const double c = py(std::max(y0, y1)), d = py(std::min(y0, y1));
  body_.push_back("<rect x=\"" + fmt(a) + "\" y=\"" + fmt(c) + "\" width=\"" + fmt(b - a) + "\" height=\"" +
                  fmt(d - c) + "\" fill=\"" + color + "\"/>");
}

void SvgPlot::polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                       double width, const std::string& css_class) {
  std::string pts;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    if (!pts.empty()) pts += ' ';
    pts += fmt(px(x[i])) + "," + fmt(py(y[i]));
  }
  std::string el = "<polyline";
  if (!css_class.empty()) el += " class=\"" + esc(css_class) + "\"";
  el += " fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) + "\" points=\"" + pts + "\"/>";
  body_.push_back(el);
}

void SvgPlot::marker(double x, double y, const std::string& color, const std::string& css_class, double radius) {
  body_.push_back("<circle class=\"" + esc(css_class) + "\" cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                  "\" r=\"" + fmt(radius) + "\" fill=\"" + color + "\" stroke=\"#000\"/>");
}

void SvgPlot::text(double x, double y, const std::string& t, const std::string& color) {
  body_.push_back("<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(py(y)) + "\" font-size=\"11\" fill=\"" + color +
                  "\">" + esc(t) + "</text>");
}

void SvgPlot::legend(const std::vector<std::pair<std::string, std::string>>& entries) { legend_ = entries; }

std::string SvgPlot::str() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
     << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (const auto& b : body_) os << b << '\n';
  const double x0 = px(x_lo_), x1 = px(x_hi_), y0 = py(y_lo_), y1 = py(y_hi_);
  os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
     << fmt(y0 - y1) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo_ + (x_hi_ - x_lo_) * k / 4, yv = y_lo_ + (y_hi_ - y_lo_) * k / 4;
    os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(y0 + 16) << "\" font-size=\"11\" text-anchor=\"middle\">"
       << tick(xv) << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(py(yv) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
       << tick(yv) << "</text>\n";
  }
  if (!title_.empty())
    os << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" << esc(title_)
       << "</text>\n";
  if (!x_label_.empty())
    os << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << height_ - 12
       << "\" font-size=\"12\" text-anchor=\"middle\">" << esc(x_label_) << "</text>\n";
  if (!y_label_.empty())
    os << "<text transform=\"translate(16," << fmt((y0 + y1) / 2)
       << ") rotate(-90)\" font-size=\"12\" text-anchor=\"middle\">" << esc(y_label_) << "</text>\n";
  for (std::size_t i = 0; i < legend_.size(); ++i) {
    const double ly = y1 + 14 + 18 * static_cast<double>(i);
    os << "<rect x=\"" << fmt(x1 + 12) << "\" y=\"" << fmt(ly - 9) << "\" width=\"12\" height=\"12\" fill=\""
       << legend_[i].second << "\"/>\n";
    os << "<text x=\"" << fmt(x1 + 30) << "\" y=\"" << fmt(ly + 1) << "\" font-size=\"11\">" << esc(legend_[i].first)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void SvgPlot::save(const std::filesystem::path& path) const { write_text(path, str()); }

std::string ramp_color(double v) {
  if (!std::isfinite(v)) return "#888888";
  v = std::clamp(v, 0.0, 1.0);
  // white -> blue -> dark red
  double r, g, b;
  if (v < 0.5) {
    const double t = v / 0.5;
    r = 255 * (1 - t) + 40 * t;
    g = 255 * (1 - t) + 90 * t;
    b = 255 * (1 - t) + 200 * t;
  } else {
    const double t = (v - 0.5) / 0.5;
    r = 40 * (1 - t) + 170 * t;
    g = 90 * (1 - t) + 20 * t;
    b = 200 * (1 - t) + 30 * t;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r)), static_cast<int>(std::lround(g)),
                static_cast<int>(std::lround(b)));
  return buf;
}

}  // namespace ep3
