#include "clusterfit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clusterfit::svg {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 24, kTop = 40, kBottom = 56;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string tick_label(double log10_value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "1e%+d", static_cast<int>(std::lround(log10_value)));
    return buf;
}

}  // namespace

std::string render_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] > 0.0 && s.y[i] > 0.0) {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (!(xmin < xmax)) xmax = xmin * 10.0;
    if (!(std::isfinite(xmin) && std::isfinite(ymin))) {
        xmin = 0.1;
        xmax = 10.0;
        ymin = 0.1;
        ymax = 10.0;
    }
    if (!(ymin < ymax)) ymax = ymin * 10.0;
    double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
    lx0 -= 0.04 * (lx1 - lx0 + 1e-9);
    lx1 += 0.04 * (lx1 - lx0 + 1e-9);
    ly0 -= 0.06 * (ly1 - ly0 + 1e-9);
    ly1 += 0.06 * (ly1 - ly0 + 1e-9);

    auto px = [&](double x) {
        return kLeft + (std::log10(x) - lx0) / (lx1 - lx0) * (kWidth - kLeft - kRight);
    };
    auto py = [&](double y) {
        return kHeight - kBottom - (std::log10(y) - ly0) / (ly1 - ly0) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
       << "</text>\n";

    // frame
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
       << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // decade ticks
    for (int e = static_cast<int>(std::floor(lx0)); e <= static_cast<int>(std::ceil(lx1)); ++e) {
        double v = std::pow(10.0, e);
        if (std::log10(v) < lx0 || std::log10(v) > lx1) continue;
        double x = px(v);
        os << "<line x1=\"" << x << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << x << "\" y2=\""
           << kHeight - kBottom + 5 << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << kHeight - kBottom + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(e) << "</text>\n";
    }
    for (int e = static_cast<int>(std::floor(ly0)); e <= static_cast<int>(std::ceil(ly1)); ++e) {
        double v = std::pow(10.0, e);
        if (std::log10(v) < ly0 || std::log10(v) > ly1) continue;
        double y = py(v);
        os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
           << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(e) << "</text>\n";
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 14
       << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    os << "<text x=\"18\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << kHeight / 2 << ")\">" << ylabel << "</text>\n";

    double legend_y = kTop + 16;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
        if (s.dashed) os << " stroke-dasharray=\"6 4\"";
        os << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
            os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
        }
        os << "\"/>\n";
        if (!s.dashed) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
                os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
                   << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
            }
        }
        os << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << legend_y << "\" x2=\""
           << kWidth - kRight - 122 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
           << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        os << "<text x=\"" << kWidth - kRight - 116 << "\" y=\"" << legend_y + 4
           << "\" font-size=\"11\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
    return os.str();
}

void write_loglog(const std::string& path, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, const std::vector<Series>& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("svg: cannot open " + path);
    f << render_loglog(title, xlabel, ylabel, series);
}

}  // namespace clusterfit::svg
