#pragma once

// Minimal SVG plots for the command line tool: rasters, line traces and
// arena trajectories. Coordinates are given in data units.

#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "neuroloop/arena.hpp"

namespace neuroloop::svg {

class Plot {
public:
    // Data ranges map onto a width x height canvas with a fixed margin.
    // With `y_down`, larger y values are drawn lower, as in the arena.
    Plot(double x0, double x1, double y0, double y1, int width = 640, int height = 400, bool y_down = false);

    void title(const std::string& text);
    void axis_labels(const std::string& x, const std::string& y);
    void dot(double x, double y, double r, const std::string& colour);
    void circle(double x, double y, double r_data, const std::string& fill, const std::string& stroke);
    void rect(double x0, double y0, double x1, double y1, const std::string& stroke);
    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& colour,
                  double width = 1.0);

    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    double x0_, x1_, y0_, y1_;
    int width_, height_;
    bool y_down_;
    std::ostringstream body_;
};

// Colour cycle for overlaid series.
const std::string& colour(std::size_t i);

}  // namespace neuroloop::svg
