#ifndef SCATTER_NUMERIC_HPP
#define SCATTER_NUMERIC_HPP

#include <functional>
#include <span>
#include <vector>

#include "scatter/types.hpp"

namespace scatter {

/// Pairwise (cascade) summation.  Fixed reduction order independent of the
/// caller's loop structure, so accumulated results are bit-reproducible.
double pairwise_sum(std::span<const double> v);
cd pairwise_sum(std::span<const cd> v);

/// Gauss-Legendre nodes/weights on [-1,1], cached per order.
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
  static const GaussLegendre& order(int n);
};

/// Nodes/weights of a composite Gauss-Legendre rule over [a,b].
struct PanelRule {
  std::vector<double> x;
  std::vector<double> w;
  void append(double a, double b, int panels, int order = 12);
  std::size_t size() const { return x.size(); }
};

/// Composite Gauss-Legendre integral of f over [a,b].
template <class F>
auto integrate_gl(F&& f, double a, double b, int panels, int order = 12) {
  const auto& gl = GaussLegendre::order(order);
  using R = decltype(f(a));
  std::vector<R> terms;
  terms.reserve(static_cast<std::size_t>(panels) * gl.x.size());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (std::size_t j = 0; j < gl.x.size(); ++j)
      terms.push_back(f(c + 0.5 * h * gl.x[j]) * (0.5 * h * gl.w[j]));
  }
  return pairwise_sum(std::span<const R>(terms));
}

/// Weights reproducing composite Simpson on a uniform mesh (trapezoid
/// fallback on non-uniform spacing).  Used for integrals of sampled data.
std::vector<double> sample_quad_weights(std::span<const double> x);

/// sin(lam*u)/lam, continuous through lam == 0.
double sinc_lam(double lam, double u);

/// Exact transform int e^{-i mu y} f(y) dy of the piecewise-linear
/// interpolant through (x, v); requires Im(mu) <= 0.
cd fourier_linear_interp(std::span<const double> x, std::span<const cd> v, cd mu);

/// Static-partition parallel loop; each index writes only its own slot, so
/// results do not depend on the thread count (SCATTER_THREADS overrides).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
int thread_count();

}  // namespace scatter

#endif
