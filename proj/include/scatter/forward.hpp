#ifndef SCATTER_FORWARD_HPP
#define SCATTER_FORWARD_HPP

#include <Eigen/Dense>

#include "scatter/transforms.hpp"

namespace scatter {

enum class Side { plus, minus };

/// Jost determinant, coefficients and varphi samples on the grid.
struct JostAssembly {
  SpectralGrid grid;
  std::vector<std::vector<std::vector<cd>>> varphi;  // [s][k][i], even in lambda
  std::vector<cd> e0;                                // determinant samples
  std::vector<std::vector<cd>> ek;                   // [k][i] coefficients
  std::vector<bool> coeff_valid;                     // false where |e0| ~ 0
  std::vector<double> Ealpha;                        // real zeros of e0 (>= 0)
};

/// Scattering function, channel multipliers and their boundary values.
struct ScatteringProfile {
  SpectralGrid grid;
  std::vector<cd> r;                      // det R(lambda)
  std::vector<cd> S;                      // NaN inside flagged neighborhoods
  std::vector<std::vector<cd>> Sk;        // [k][i]
  std::vector<std::vector<cd>> bk_plus;   // [k][i] boundary values of b_k
  std::vector<std::vector<cd>> bk_minus;  // [k][i]
  std::vector<double> real_zeros;         // positive zeros of r
  std::vector<bool> flagged;              // per-node exclusion mask

  bool node_ok(int i) const { return !flagged[static_cast<std::size_t>(i)]; }
  /// S at node i; evaluation inside a flagged zero neighborhood is an error.
  cd S_at(int i) const;
  cd Sk_at(int k, int i) const;
};

struct ResolventMatrix {
  cd z;
  Eigen::MatrixXcd T;  // entry (s,k) = <R0(z) v_k, v_s>
  Eigen::VectorXd alpha;
};

struct BkChain {
  std::vector<cd> bk;
  cd product;
};

/// varphi_{s,k} samples for every pair.
std::vector<std::vector<std::vector<cd>>> varphi_matrix(const TransformSet& ts);

/// Boundary matrix with entries <R0(lambda^2 +- i0) v_k, v_s> at grid node i.
Eigen::MatrixXcd resolvent_boundary(const TransformSet& ts, int i, Side side);

/// Solves the coefficient system at every node; nodes where the determinant
/// nearly vanishes are recorded in Ealpha instead of producing coefficients.
JostAssembly assemble_jost(const SeparablePotential& pot, const TransformSet& ts);

/// Pointwise Jost data at arbitrary real lambda (off the zero set).
struct JostPoint {
  cd e0;
  Eigen::VectorXcd ek;
};
JostPoint jost_point(const SeparablePotential& pot, double lam);

/// psi_k(lam, x) = int_x^inf sinc_lam(t-x) v(t) dt and its x-derivative,
/// evaluated through the known full-line transform (no slow-tail quadrature).
cd psi_k(const HalfLineFunction& v, double lam, double x);
cd psi_k_deriv(const HalfLineFunction& v, double lam, double x);

/// Jost solution e(lam, x) and d/dx e(lam, x); lam inside the zero set is an
/// error.
cd jost_solution(const JostAssembly& ja, const SeparablePotential& pot, double lam,
                 double x);
cd jost_solution_deriv(const JostAssembly& ja, const SeparablePotential& pot, double lam,
                       double x);

/// R(lambda) at node i and its determinant r.
Eigen::MatrixXcd r_matrix(const TransformSet& ts, int i);
cd r_point(const SeparablePotential& pot, double lam);

/// Full profile: r, S, channel multipliers, boundary values, detected zeros.
ScatteringProfile scattering_profile(const SeparablePotential& pot, const TransformSet& ts);

/// Resolvent matrix T(z) for Im z != 0 (principal branch Im sqrt(z) > 0).
ResolventMatrix resolvent_T(const TransformSet& ts, cd z);

/// Rank-one chain b_k(z) = 1 + alpha_k <R_{k-1}(z) v_k, v_k> and the product.
BkChain bk_chain(const SeparablePotential& pot, const TransformSet& ts, cd z);

/// Same chain started from a boundary matrix (real lambda).
BkChain bk_chain_from(const Eigen::MatrixXcd& T0, const Eigen::VectorXd& alpha);

}  // namespace scatter

#endif
