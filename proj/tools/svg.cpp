#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop::svg {

namespace {

constexpr double kMargin = 48;

std::string num(double v) { return format_double(std::round(v * 100) / 100); }

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

}  // namespace

Plot::Plot(double x0, double x1, double y0, double y1, int width, int height, bool y_down)
    : x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1), y0_(y0), y1_(y1 > y0 ? y1 : y0 + 1), width_(width), height_(height),
      y_down_(y_down) {}

double Plot::px(double x) const { return kMargin + (x - x0_) / (x1_ - x0_) * (width_ - 2 * kMargin); }

double Plot::py(double y) const {
    const double f = (y - y0_) / (y1_ - y0_);
    return y_down_ ? kMargin + f * (height_ - 2 * kMargin) : height_ - kMargin - f * (height_ - 2 * kMargin);
}

void Plot::title(const std::string& text) {
    body_ << "<text x=\"" << num(width_ / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
          << escape(text) << "</text>\n";
}

void Plot::axis_labels(const std::string& x, const std::string& y) {
    body_ << "<text x=\"" << num(width_ / 2.0) << "\" y=\"" << num(height_ - 10.0)
          << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x) << " [" << num(x0_) << ", " << num(x1_)
          << "]</text>\n";
    body_ << "<text x=\"14\" y=\"" << num(height_ / 2.0) << "\" text-anchor=\"middle\" font-size=\"12\" "
          << "transform=\"rotate(-90 14 " << num(height_ / 2.0) << ")\">" << escape(y) << " [" << num(y0_) << ", "
          << num(y1_) << "]</text>\n";
}

void Plot::dot(double x, double y, double r, const std::string& colour) {
    body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(r) << "\" fill=\""
          << colour << "\"/>\n";
}

void Plot::circle(double x, double y, double r_data, const std::string& fill, const std::string& stroke) {
    const double r = r_data / (x1_ - x0_) * (width_ - 2 * kMargin);
    body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(r) << "\" fill=\""
          << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void Plot::rect(double x0, double y0, double x1, double y1, const std::string& stroke) {
    const double a = px(x0), b = px(x1), c = py(y0), d = py(y1);
    body_ << "<rect x=\"" << num(std::min(a, b)) << "\" y=\"" << num(std::min(c, d)) << "\" width=\""
          << num(std::abs(b - a)) << "\" height=\"" << num(std::abs(d - c)) << "\" fill=\"none\" stroke=\"" << stroke
          << "\"/>\n";
}

void Plot::polyline(const std::vector<std::pair<double, double>>& points, const std::string& colour,
                    double width) {
    if (points.empty()) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << num(width) << "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        body_ << (i ? " " : "") << num(px(points[i].first)) << ',' << num(py(points[i].second));
    }
    body_ << "\"/>\n";
}

std::string Plot::str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
        << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
}

void Plot::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw StreamError("cannot write " + path.string());
    out << str();
}

const std::string& colour(std::size_t i) {
    static const std::array<std::string, 6> c{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    return c[i % c.size()];
}

}  // namespace neuroloop::svg
