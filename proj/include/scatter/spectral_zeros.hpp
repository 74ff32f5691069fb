#ifndef SCATTER_SPECTRAL_ZEROS_HPP
#define SCATTER_SPECTRAL_ZEROS_HPP

#include <Eigen/Dense>

#include "scatter/forward.hpp"

namespace scatter {

struct BoundState {
  double kappa = 0.0;
  Eigen::VectorXcd fvec;   // unit kernel vector
  double energy = 0.0;     // -kappa^2
  double residual = 0.0;   // ||(M + 2 pi alpha^{-1}) f||
  int multiplicity = 1;
};

struct RealZeroSet {
  std::vector<double> zeros;       // accepted positive zeros of r
  std::vector<int> multiplicity;
  std::vector<double> near_zeros;  // candidates failing the kernel filter
  bool includes_origin = true;
};

struct BoundStateScan {
  double kappa_min = 1e-3;
  double kappa_max = 0.0;  // 0 -> automatic from the matrix norm bound
  int panels = 320;
};

/// Hermitian kernel matrix M(kappa) = int_0^inf W^+(t) W(t) / (t^2 + kappa^2) dt.
Eigen::MatrixXcd boundstate_kernel_M(const TransformSet& ts, double kappa);

/// Scans the sorted eigenvalue branches of M(kappa) + 2 pi alpha^{-1} for
/// sign changes; each crossing is a bound state.  Empty when no coupling is
/// negative.
std::vector<BoundState> find_bound_states(const SeparablePotential& pot,
                                          const TransformSet& ts,
                                          const BoundStateScan& scan = {});

/// n = 1 residual |int |W|^2/(t^2+kappa^2) dt + 2 pi / alpha|.
double verify_boundstate_tracelaw(const BoundState& bs, const TransformSet& ts,
                                  double alpha);

/// Locates real zeros of r from the profile and filters candidates by the
/// kernel conditions (W f = 0 and the PV matrix condition).
RealZeroSet find_real_zeros(const ScatteringProfile& profile, const TransformSet& ts);

/// Bound-state eigenfunction samples on xgrid, normalized to unit L2 norm.
std::vector<cd> boundstate_eigenfunction(const BoundState& bs,
                                         const SeparablePotential& pot,
                                         const TransformSet& ts,
                                         const std::vector<double>& xgrid);

}  // namespace scatter

#endif
