#ifndef SCATTER_POTENTIAL_HPP
#define SCATTER_POTENTIAL_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "scatter/types.hpp"

namespace scatter {

enum class FunctionKind { exp_decay, band_bump, sampled };

/// One half-line kernel function v(x).  Three catalog forms:
///   exp_decay(a):    v(x) = sqrt(2a) e^{-ax}
///   band_bump(lo,hi): the function whose sine transform is a smooth bump
///                     supported on (lo,hi), scaled so that ||v||_2 = 1
///   sampled:          tabulated values, linear interpolation, zero beyond
///                     the last node with a |v| <= C (1+x)^{-2} tail bound
///
/// Every form exposes its Fourier data directly: the sine transform
/// shat(t) = int sin(tx) v(x) dx, the cosine transform chat(t), and the
/// half-line Fourier transform vtilde(mu) = int e^{-i mu x} v(x) dx, which
/// is analytic in the lower half-plane.  Catalog forms carry closed forms;
/// sampled data integrates its interpolant exactly segment by segment.
class HalfLineFunction {
public:
  /// Default-constructs the unit exponential exp_decay(1).
  HalfLineFunction() : kind_(FunctionKind::exp_decay), a_(1.0), x_max_(41.5) {}

  static HalfLineFunction exp_decay(double a);
  static HalfLineFunction band_bump(double lo, double hi);
  static HalfLineFunction sampled(std::vector<double> x, std::vector<cd> v,
                                  double decay_bound);

  FunctionKind kind() const { return kind_; }
  bool is_real() const { return real_valued_; }
  bool fast_decay() const { return kind_ != FunctionKind::band_bump; }
  bool is_band() const { return kind_ == FunctionKind::band_bump; }
  double band_lo() const { return lo_; }
  double band_hi() const { return hi_; }
  double exp_rate() const { return a_; }

  double x_max() const { return x_max_; }
  double decay_bound() const { return decay_bound_; }

  /// v(x); x < 0 is a domain error.
  cd eval(double x) const;

  cd sine_transform(double t) const;  // t >= 0
  cd cos_transform(double t) const;   // t >= 0
  /// int_0^inf e^{-i mu x} v(x) dx for Im(mu) <= 0.
  cd vtilde(cd mu) const;
  /// vtilde at a real point, computed through the sine/cosine transforms so
  /// that vtilde(-lam) == conj(vtilde(lam)) holds exactly for real v.
  cd vtilde_real(double lam) const;

  double l2_norm() const;
  double l1_norm() const;
  /// int (1+x^2) |v|^2 dx, the admissibility moment.
  double weighted_moment() const;

  /// Rescaled copy with unit L2 norm; *factor receives the old norm.
  HalfLineFunction normalized(double* factor = nullptr) const;

  std::string describe() const;

  // sampled access (used by interpolation tests and serialization)
  const std::vector<double>& sample_x() const { return sx_; }
  const std::vector<cd>& sample_v() const { return sv_; }

private:
  cd vtilde_sampled(cd mu) const;
  double bump_amp() const { return amp_; }

  FunctionKind kind_ = FunctionKind::exp_decay;
  double a_ = 1.0;                  // exp_decay rate
  double lo_ = 0.0, hi_ = 0.0;      // band support
  double amp_ = 0.0;                // band amplitude after normalization
  std::vector<double> sx_;          // sampled nodes
  std::vector<cd> sv_;              // sampled values
  double x_max_ = 0.0;
  double decay_bound_ = 0.0;
  bool real_valued_ = true;
};

struct PotentialTerm {
  double alpha = 0.0;
  HalfLineFunction v;
};

/// Finite-rank separable perturbation sum_k alpha_k <., v_k> v_k.
struct SeparablePotential {
  std::vector<PotentialTerm> terms;

  int n() const { return static_cast<int>(terms.size()); }
  double alpha(int k) const { return terms[static_cast<std::size_t>(k)].alpha; }
  const HalfLineFunction& v(int k) const { return terms[static_cast<std::size_t>(k)].v; }
  int negative_count() const;

  /// Checks alpha_k != 0, unit norms within 1e-8, and linear independence
  /// (smallest Gram eigenvalue > 1e-10).  Throws Errc::data on violation.
  void validate() const;
};

/// <v_k, v_s> = int conj(v_s) v_k dx, dispatched per pair kind.
cd inner_product(const HalfLineFunction& vs, const HalfLineFunction& vk);

/// Adaptive Gauss-Legendre integration used by the catalog paths.
cd adaptive_integrate(const std::function<cd(double)>& f, double a, double b,
                      double tol, int max_depth = 26);

/// PV int_a^b f(nu)/(nu - pole) dnu with pole strictly inside (a,b),
/// regularized by value subtraction at the pole.
cd pv_interval(const std::function<cd(double)>& f, double a, double b,
               double pole, double tol);

}  // namespace scatter

#endif
