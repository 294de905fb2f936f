#pragma once

#include <string>
#include <utility>
#include <vector>

namespace vmp {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Multi-series line chart with axes, tick labels, and a legend. `bands`
/// lists x-intervals to shade (used for 1D highest-density regions).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series,
                      const std::vector<std::pair<double, double>>& bands = {});

/// Grid heatmap of `values` (row-major, ny rows by nx columns) over the
/// rectangle [x0,x1] x [y0,y1]; cells flagged in `region` get an overlay.
/// `region` may be empty.
void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel, double x0, double x1,
                   double y0, double y1, int nx, int ny, const std::vector<double>& values,
                   const std::vector<unsigned char>& region);

}  // namespace vmp
