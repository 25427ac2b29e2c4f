#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace criticalwave::app {

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line chart rendered to a standalone SVG document (inline styles, generic
/// font families only). Non-finite points, and nonpositive points on log
/// axes, are skipped.
struct Chart
{
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;

    std::string render() const;
    void write(const std::filesystem::path& file) const;
};

} // namespace criticalwave::app
