#ifndef SCATTER_GRID_HPP
#define SCATTER_GRID_HPP

#include <vector>

#include "scatter/types.hpp"

namespace scatter {

/// Symmetric spectral grid on [-lambda_max, lambda_max].  Strictly
/// increasing, contains 0, and mirror-closed: for every node x, -x is also a
/// node.  `marks` annotates centers (detected zeros) that downstream
/// consumers treat as excluded neighborhoods.
class SpectralGrid {
public:
  SpectralGrid() = default;

  /// Uniform grid with `half_points` nodes on each side of 0
  /// (2*half_points + 1 nodes total).
  static SpectralGrid uniform(double lambda_max, int half_points);

  /// Builds from an explicit strictly increasing symmetric node list
  /// containing 0; validates the invariants.
  static SpectralGrid from_points(std::vector<double> pts);

  double lambda_max() const { return lambda_max_; }
  int size() const { return static_cast<int>(pts_.size()); }
  double operator[](int i) const { return pts_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& points() const { return pts_; }

  int zero_index() const { return zero_index_; }
  /// Index of -pts[i].
  int mirror(int i) const { return 2 * zero_index_ - i; }
  bool is_uniform() const { return uniform_; }
  double spacing() const;

  /// Integration weights over the full grid (Simpson when uniform).
  const std::vector<double>& quad_weights() const;

  /// Nodes with lambda >= 0 start at zero_index().
  int half_size() const { return size() - zero_index_; }

  void add_mark(double center) { marks_.push_back(center); }
  const std::vector<double>& marks() const { return marks_; }
  /// True when lam falls inside a flagged neighborhood (radius
  /// 1e-3 * lambda_max around each mark and around 0).
  bool flagged(double lam) const;
  double flag_radius() const { return 1e-3 * lambda_max_; }

private:
  double lambda_max_ = 0.0;
  std::vector<double> pts_;
  std::vector<double> marks_;
  int zero_index_ = 0;
  bool uniform_ = true;
  mutable std::vector<double> weights_;
};

}  // namespace scatter

#endif
