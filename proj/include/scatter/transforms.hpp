#ifndef SCATTER_TRANSFORMS_HPP
#define SCATTER_TRANSFORMS_HPP

#include <vector>

#include "scatter/grid.hpp"
#include "scatter/potential.hpp"

namespace scatter {

/// Grid samples of every lambda- and y-domain transform derived from one
/// potential: vt[k][i] = vtilde_k(lambda_i), W[k][i] = vt_k(lambda) -
/// vt_k(-lambda) (odd by construction), Phi[s][k][i] the transform of the
/// cross-correlation g_{s,k}, and g[s][k][j] samples of g_{s,k} on ygrid.
struct TransformSet {
  SpectralGrid grid;
  SeparablePotential pot;
  std::vector<std::vector<cd>> vt;
  std::vector<std::vector<cd>> W;
  std::vector<std::vector<std::vector<cd>>> Phi;
  std::vector<double> ygrid;
  std::vector<std::vector<std::vector<cd>>> g;

  int n() const { return static_cast<int>(vt.size()); }
  cd vt_at(int k, int i) const { return vt[k][static_cast<std::size_t>(i)]; }
  cd W_at(int k, int i) const { return W[k][static_cast<std::size_t>(i)]; }
  cd Phi_at(int s, int k, int i) const {
    return Phi[s][k][static_cast<std::size_t>(i)];
  }
};

/// Builds all grid samples for the potential.  ygrid covers [0, y_span]
/// with ny points (defaults chosen for the diagnostics; the internal
/// quadratures do not depend on this sampling).
TransformSet build_transforms(const SeparablePotential& pot, const SpectralGrid& grid,
                              double y_span = 20.0, int ny = 257);

/// vtilde on every grid node; exact mirror symmetry vt(-l) = conj vt(l)
/// for real-valued v.
std::vector<cd> fourier_vtilde(const HalfLineFunction& f, const SpectralGrid& grid);

/// W(lambda) = -2i * (sine transform), computed from the sine integral
/// rather than as a difference of two vtilde values; odd on the grid.
std::vector<cd> sine_W(const HalfLineFunction& f, const SpectralGrid& grid);

/// g_{s,k}(y) = int conj(v_s(x+y)) v_k(x) dx on the given y nodes.
std::vector<cd> cross_corr_g(const HalfLineFunction& fs, const HalfLineFunction& fk,
                             const std::vector<double>& ygrid);

/// Pointwise g_{s,k}(y); y may be negative (reflection rule applies).
cd cross_corr_g_point(const HalfLineFunction& fs, const HalfLineFunction& fk, double y);

/// Transform of sampled correlation data: Phi(lambda) = int e^{-i lambda y} g(y) dy
/// for the piecewise-linear interpolant of (ygrid, gvals).
std::vector<cd> phi_Phi(const std::vector<double>& ygrid, const std::vector<cd>& gvals,
                        const SpectralGrid& grid);

/// Pointwise Phi_{s,k}(mu) for Im(mu) <= 0, dispatched per pair kind.
cd Phi_point(const HalfLineFunction& fs, const HalfLineFunction& fk, cd mu);

/// phi_{s,k}(lambda) = int_0^inf sinc_lambda(y) conj(g_{s,k}(y)) dy,
/// even in lambda and finite at lambda = 0.
cd varphi_point(const HalfLineFunction& fs, const HalfLineFunction& fk, double lam);

/// varphi on every grid node (even in lambda by construction).
std::vector<cd> varphi_grid(const HalfLineFunction& fs, const HalfLineFunction& fk,
                            const SpectralGrid& grid);

/// PV int_0^inf conj(shat_s(t)) shat_k(t) / (t^2 - lam^2) dt evaluated from
/// the function transforms (real-valued kernels only).
cd pv_sine_product(const HalfLineFunction& fs, const HalfLineFunction& fk, double lam);

/// Canonical representative with nonnegative sine transform recovered from
/// |W| samples; returns a sampled HalfLineFunction on xgrid.  The norm is
/// not rescaled.  Raises Errc::inconsistent_data when Wabs(0) != 0.
HalfLineFunction inverse_sine_recover_v(const std::vector<double>& wabs,
                                        const SpectralGrid& grid,
                                        const std::vector<double>& xgrid);

/// int_R |W|^2 dlambda including the fitted power tail beyond the grid.
double parseval_W_norm(const std::vector<cd>& w, const SpectralGrid& grid);

/// Sine integral Si(x) = int_0^x sin(t)/t dt.
double sine_integral(double x);

}  // namespace scatter

#endif
