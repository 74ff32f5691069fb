#include "scatter/grid.hpp"

#include <cmath>

#include "scatter/numeric.hpp"

namespace scatter {

SpectralGrid SpectralGrid::uniform(double lambda_max, int half_points) {
  if (!(lambda_max > 0.0)) throw Error(Errc::domain, "grid: lambda_max must be positive");
  if (half_points < 2) throw Error(Errc::domain, "grid: need at least 2 points per side");
  SpectralGrid g;
  g.lambda_max_ = lambda_max;
  g.zero_index_ = half_points;
  g.pts_.resize(static_cast<std::size_t>(2 * half_points + 1));
  const double h = lambda_max / half_points;
  for (int i = -half_points; i <= half_points; ++i)
    g.pts_[static_cast<std::size_t>(i + half_points)] = i * h;
  g.pts_[static_cast<std::size_t>(half_points)] = 0.0;
  g.uniform_ = true;
  return g;
}

SpectralGrid SpectralGrid::from_points(std::vector<double> pts) {
  if (pts.size() < 5 || pts.size() % 2 == 0)
    throw Error(Errc::data, "grid: need an odd node count >= 5");
  SpectralGrid g;
  g.pts_ = std::move(pts);
  const int n = static_cast<int>(g.pts_.size());
  g.zero_index_ = n / 2;
  if (g.pts_[static_cast<std::size_t>(g.zero_index_)] != 0.0)
    throw Error(Errc::data, "grid: middle node must be 0");
  for (int i = 1; i < n; ++i)
    if (!(g.pts_[static_cast<std::size_t>(i)] > g.pts_[static_cast<std::size_t>(i - 1)]))
      throw Error(Errc::data, "grid: nodes must strictly increase");
  for (int i = 0; i < n; ++i)
    if (std::abs(g.pts_[static_cast<std::size_t>(i)] +
                 g.pts_[static_cast<std::size_t>(n - 1 - i)]) > 1e-12)
      throw Error(Errc::data, "grid: nodes must be symmetric about 0");
  g.lambda_max_ = g.pts_.back();
  const double h = g.pts_[1] - g.pts_[0];
  g.uniform_ = true;
  for (int i = 1; i + 1 < n; ++i)
    if (std::abs((g.pts_[static_cast<std::size_t>(i + 1)] -
                  g.pts_[static_cast<std::size_t>(i)]) -
                 h) > 1e-10 * std::max(1.0, h))
      g.uniform_ = false;
  return g;
}

double SpectralGrid::spacing() const {
  if (pts_.size() < 2) return 0.0;
  return pts_[1] - pts_[0];
}

const std::vector<double>& SpectralGrid::quad_weights() const {
  if (weights_.empty()) weights_ = sample_quad_weights(pts_);
  return weights_;
}

bool SpectralGrid::flagged(double lam) const {
  const double r = flag_radius();
  if (std::abs(lam) < r) return true;
  for (double m : marks_)
    if (std::abs(std::abs(lam) - std::abs(m)) < r) return true;
  return false;
}

}  // namespace scatter
