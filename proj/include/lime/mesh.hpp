#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lime {

/// Nodes 0 = x_0 < x_1 < ... < x_N = L of a 1D grid, with cached cell widths.
class Grid1D {
 public:
  /// Throws ConfigError unless there are at least two strictly increasing
  /// finite nodes starting at 0.
  explicit Grid1D(std::vector<double> nodes);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t cell_count() const noexcept { return widths_.size(); }
  double length() const noexcept { return nodes_.back(); }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> widths() const noexcept { return widths_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double width(std::size_t c) const { return widths_[c]; }

  bool operator==(const Grid1D& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> widths_;
};

/// Geometric grading on [0, L]: width_i = w0 * ratio^i. The last node is set
/// to L exactly, so the last width absorbs rounding.
Grid1D build_graded_grid(std::size_t cells, double length, double ratio);

/// Trapezoidal (lumped) node masses; they sum to L.
std::vector<double> node_lumped_masses(const Grid1D& grid);

/// One node per line, shortest round-trip decimal form.
std::string serialize_grid(const Grid1D& grid);
Grid1D parse_grid(const std::string& text);

}  // namespace lime
