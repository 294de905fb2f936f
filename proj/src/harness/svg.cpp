#include "vmp/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <system_error>

#include "vmp/errors.hpp"

namespace vmp {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kLeft = 70;
constexpr int kRight = 640;
constexpr int kTop = 46;
constexpr int kBottom = 420;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
    [[nodiscard]] double map(double v, double pix_lo, double pix_hi) const {
        return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
    }
};

AxisRange make_range(double lo, double hi) {
    if (!(lo < hi)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.04 * (hi - lo);
    return {lo - pad, hi + pad};
}

std::ofstream open_svg(const std::string& path) {
    const std::filesystem::path target(path);
    std::error_code ec;
    if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path(), ec);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("svg: cannot write '" + path + "'");
    return out;
}

void write_frame(std::ofstream& out, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, const AxisRange& xr, const AxisRange& yr) {
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << (kRight - kLeft)
        << "\" height=\"" << (kBottom - kTop)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << (kHeight - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(xlabel) << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">"
        << xml_escape(ylabel) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double px = xr.map(fx, kLeft, kRight);
        out << "<line x1=\"" << fixed2(px) << "\" y1=\"" << kBottom << "\" x2=\"" << fixed2(px)
            << "\" y2=\"" << (kBottom + 5) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fixed2(px) << "\" y=\"" << (kBottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(fx) << "</text>\n";
        const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        const double py = yr.map(fy, kBottom, kTop);
        out << "<line x1=\"" << (kLeft - 5) << "\" y1=\"" << fixed2(py) << "\" x2=\"" << kLeft
            << "\" y2=\"" << fixed2(py) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << (kLeft - 8) << "\" y=\"" << fixed2(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(fy) << "</text>\n";
    }
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<SvgSeries>& series,
                      const std::vector<std::pair<double, double>>& bands) {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    const AxisRange xr = make_range(xmin, xmax);
    const AxisRange yr = make_range(ymin, ymax);

    std::ofstream out = open_svg(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";

    for (const auto& band : bands) {
        const double a = std::clamp(xr.map(band.first, kLeft, kRight),
                                    static_cast<double>(kLeft), static_cast<double>(kRight));
        const double b = std::clamp(xr.map(band.second, kLeft, kRight),
                                    static_cast<double>(kLeft), static_cast<double>(kRight));
        if (b <= a) continue;
        out << "<rect x=\"" << fixed2(a) << "\" y=\"" << kTop << "\" width=\""
            << fixed2(b - a) << "\" height=\"" << (kBottom - kTop)
            << "\" fill=\"#ffd9b3\" fill-opacity=\"0.6\"/>\n";
    }

    write_frame(out, title, xlabel, ylabel, xr, yr);

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (ser.x.size() >= 2) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.8\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (i) out << " ";
                out << fixed2(xr.map(ser.x[i], kLeft, kRight)) << ","
                    << fixed2(yr.map(ser.y[i], kBottom, kTop));
            }
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < ser.x.size(); ++i)
            out << "<circle cx=\"" << fixed2(xr.map(ser.x[i], kLeft, kRight)) << "\" cy=\""
                << fixed2(yr.map(ser.y[i], kBottom, kTop)) << "\" r=\"2.2\" fill=\"" << color
                << "\"/>\n";
        const int ly = kTop + 16 + 16 * static_cast<int>(s);
        out << "<line x1=\"" << (kRight - 120) << "\" y1=\"" << ly << "\" x2=\""
            << (kRight - 96) << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << (kRight - 90) << "\" y=\"" << (ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(ser.label)
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("svg: write failed for '" + path + "'");
}

void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel, double x0, double x1,
                   double y0, double y1, int nx, int ny, const std::vector<double>& values,
                   const std::vector<unsigned char>& region) {
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
        throw Error("svg: heatmap grid size mismatch");
    if (!region.empty() && region.size() != values.size())
        throw Error("svg: heatmap region size mismatch");
    const AxisRange xr{x0, x1};
    const AxisRange yr{y0, y1};
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;

    std::ofstream out = open_svg(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";

    const int stride_x = std::max(1, (nx + 149) / 150);
    const int stride_y = std::max(1, (ny + 149) / 150);
    for (int iy = 0; iy < ny; iy += stride_y)
        for (int ix = 0; ix < nx; ix += stride_x) {
            const int ix1 = std::min(ix + stride_x, nx);
            const int iy1 = std::min(iy + stride_y, ny);
            double v = 0.0;
            bool in_region = false;
            for (int yy = iy; yy < iy1; ++yy)
                for (int xx = ix; xx < ix1; ++xx) {
                    const std::size_t idx = static_cast<std::size_t>(yy) * nx + xx;
                    v = std::max(v, values[idx]);
                    if (!region.empty() && region[idx]) in_region = true;
                }
            const double fx0 = x0 + (x1 - x0) * ix / nx;
            const double fx1 = x0 + (x1 - x0) * ix1 / nx;
            const double fy0 = y0 + (y1 - y0) * iy / ny;
            const double fy1 = y0 + (y1 - y0) * iy1 / ny;
            const double px = xr.map(fx0, kLeft, kRight);
            const double pw = xr.map(fx1, kLeft, kRight) - px;
            const double py = yr.map(fy1, kBottom, kTop);
            const double ph = yr.map(fy0, kBottom, kTop) - py;
            const int shade = 255 - static_cast<int>(std::lround(205.0 * v / vmax));
            out << "<rect x=\"" << fixed2(px) << "\" y=\"" << fixed2(py) << "\" width=\""
                << fixed2(pw) << "\" height=\"" << fixed2(ph) << "\" fill=\"rgb(" << shade
                << "," << shade << ",255)\"/>\n";
            if (in_region)
                out << "<rect x=\"" << fixed2(px) << "\" y=\"" << fixed2(py) << "\" width=\""
                    << fixed2(pw) << "\" height=\"" << fixed2(ph)
                    << "\" fill=\"#d62728\" fill-opacity=\"0.25\"/>\n";
        }

    write_frame(out, title, xlabel, ylabel, xr, yr);
    out << "</svg>\n";
    if (!out) throw IoError("svg: write failed for '" + path + "'");
}

}  // namespace vmp
