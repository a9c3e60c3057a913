#include "lime/mesh.hpp"

#include <cmath>
#include <sstream>

#include "lime/error.hpp"
#include "lime/format.hpp"

namespace lime {

Grid1D::Grid1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("grid: at least two nodes required");
  if (nodes_.front() != 0.0) throw ConfigError("grid: first node must be at 0");
  widths_.resize(nodes_.size() - 1);
  for (std::size_t c = 0; c + 1 < nodes_.size(); ++c) {
    widths_[c] = nodes_[c + 1] - nodes_[c];
    if (!(widths_[c] > 0.0) || !std::isfinite(nodes_[c + 1])) {
      throw ConfigError("grid: nodes must be finite and strictly increasing (node " +
                        std::to_string(c + 1) + ")");
    }
  }
}

Grid1D build_graded_grid(std::size_t cells, double length, double ratio) {
  std::vector<std::string> problems;
  if (cells == 0) problems.push_back("grid.cells: at least one cell required");
  if (!(length > 0.0) || !std::isfinite(length)) problems.push_back("grid.length: must be finite and positive");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) problems.push_back("grid.ratio: must be finite and positive");
  if (!problems.empty()) throw ConfigError(problems);

  const auto n = static_cast<double>(cells);
  const double first =
      ratio == 1.0 ? length / n : length * (ratio - 1.0) / (std::pow(ratio, n) - 1.0);
  std::vector<double> nodes(cells + 1);
  nodes[0] = 0.0;
  double width = first;
  for (std::size_t i = 1; i < cells; ++i) {
    nodes[i] = ratio == 1.0 ? length * static_cast<double>(i) / n : nodes[i - 1] + width;
    width *= ratio;
  }
  nodes[cells] = length;
  return Grid1D(std::move(nodes));
}

std::vector<double> node_lumped_masses(const Grid1D& grid) {
  const auto w = grid.widths();
  std::vector<double> m(grid.node_count(), 0.0);
  for (std::size_t c = 0; c < w.size(); ++c) {
    m[c] += 0.5 * w[c];
    m[c + 1] += 0.5 * w[c];
  }
  return m;
}

std::string serialize_grid(const Grid1D& grid) {
  std::string out;
  for (double x : grid.nodes()) {
    out += format_shortest(x);
    out += '\n';
  }
  return out;
}

Grid1D parse_grid(const std::string& text) {
  std::vector<double> nodes;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto v = parse_number(line);
    if (!v) throw ConfigError("grid: line " + std::to_string(lineno) + ": not a number");
    nodes.push_back(*v);
  }
  return Grid1D(std::move(nodes));
}

}  // namespace lime
