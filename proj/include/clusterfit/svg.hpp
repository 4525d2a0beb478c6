#ifndef CLUSTERFIT_SVG_HPP
#define CLUSTERFIT_SVG_HPP

#include <string>
#include <vector>

namespace clusterfit::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool dashed = false;
    std::string color = "#1f77b4";
};

/// Minimal log-log line plot. Points with nonpositive coordinates are
/// dropped (outside the log domain).
std::string render_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series);

void write_loglog(const std::string& path, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, const std::vector<Series>& series);

}  // namespace clusterfit::svg

#endif
