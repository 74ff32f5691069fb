#ifndef SCATTER_INVERSE_HPP
#define SCATTER_INVERSE_HPP

#include <optional>
#include <string>

#include "scatter/potential.hpp"
#include "scatter/transforms.hpp"

namespace scatter {

enum class DataClass { omega0, omega_q, omega_q_kappa };

/// Inverse-problem input: odd phase samples on a symmetric grid, the real
/// zeros of r (required inputs; they are not derivable from the phase
/// alone), the bound-state kappa list, and the class tag.
///
/// zeta is the branch fixed by zeta(Lambda) ~ 0 and oddness.  It may jump
/// by integer multiples of pi at the listed zeros; the jump sizes are read
/// off the samples, never assumed.
struct ScatteringData {
  SpectralGrid grid;
  std::vector<double> zeta;
  std::vector<double> real_zeros;  // ascending, > 0
  std::vector<double> kappas;      // at most one supported by the rank-one path
  DataClass tag = DataClass::omega0;
  std::vector<bool> valid;         // false where the phase was unavailable

  int q() const { return static_cast<int>(real_zeros.size()); }
  /// integer jump (in units of pi, upward crossing) detected at each zero
  std::vector<int> zero_jumps() const;
};

enum class PhaseInput { s_samples, b_plus, b_minus };

/// Continuous phase extraction: unwraps each half-grid from its outer edge
/// (anchor zeta(Lambda) ~ 0), enforces oddness by averaging, fills flagged
/// gaps by one-sided extrapolation, and applies the -pi staircase at the
/// supplied real zeros.  Raises Errc::grid_refinement when adjacent samples
/// wind faster than the grid can resolve.
ScatteringData extract_zeta(const SpectralGrid& grid, const std::vector<cd>& samples,
                            PhaseInput kind, const std::vector<double>& real_zeros = {},
                            const std::vector<double>& kappas = {});

/// H(lambda) = exp{ (1/pi) PV int zeta(t)/(t-lambda) dt }: positive, even.
/// The staircase part of zeta integrates in closed form; only the smooth
/// part goes through the PV quadrature.
double phase_exponential(const ScatteringData& data, double lambda);

/// Auxiliary positive factor psi(lambda, kappa); independent of kappa up to
/// quadrature error (it equals 1/lambda^2 analytically).
double aux_psi(double lambda, double kappa);

struct ReconstructionOptions {
  bool legacy_alpha_constant = false;  // use the uncorrected prefactor
  std::vector<double> xgrid;           // nodes for the recovered v (default 0..40)
};

struct ReconstructionResult {
  double alpha = 0.0;
  double alpha_legacy = 0.0;          // value under the uncorrected constant
  std::vector<double> Wabs_sq;        // on the data grid, floored at 0
  HalfLineFunction v_candidate;
  double floor_magnitude = 0.0;       // largest negative value floored away
  double v_norm = 0.0;                // ||v_candidate|| (should be ~1)
};

/// alpha-independent shape lambda sin(zeta) H(lambda) x (case factors);
/// |W|^2 = (4/alpha) * shape.
std::vector<double> reconstruct_Wsq_shape(const ScatteringData& data);

/// alpha from the unit-norm constraint through the Parseval identity
/// int_R |W|^2 = 4 pi: alpha = (1/pi) int_R shape.  legacy = true applies
/// the uncorrected pi/2 half-line prefactor instead.
double reconstruct_alpha(const ScatteringData& data, const std::vector<double>& shape,
                         bool legacy = false);

ReconstructionResult reconstruct(const ScatteringData& data,
                                 const ReconstructionOptions& opts = {});

struct ClassDiagnostics {
  double odd_error = 0.0;          // max |zeta(l) + zeta(-l)|
  double comp_phase_min = 0.0;     // min of the staircase-compensated phase
  bool sign_uniform = true;        // zeta keeps one sign off the zero set
  double tail_decay_exponent = 0.0;
  double tail_integral_est = 0.0;  // estimate of int |lambda zeta| beyond grid
  bool lambda_zeta_integrable = false;
  double max_offzero_jump = 0.0;
  double smoothness_integral = 0.0;  // sampled Omega-class derivative integral
  bool approximate = true;           // sampled-sense checks only
  bool all_pass = false;
  std::string report;
};

ClassDiagnostics validate_class(const ScatteringData& data);

/// Independent channels (L0-orthogonal kernels): one reconstruction per
/// multiplier.
std::vector<ReconstructionResult> invert_channels(
    const std::vector<std::vector<cd>>& Sk, const SpectralGrid& grid,
    const std::vector<std::vector<double>>& zeros_per_channel,
    const std::vector<std::vector<double>>& kappas_per_channel,
    const ReconstructionOptions& opts = {});

/// Max-norm residual of |W|^2 == (4 lambda / alpha) Im B+(lambda) on the
/// grid (diagnostic cross-check of consistent forward data).
double perron_stieltjes_check(const std::vector<cd>& b_plus, const SpectralGrid& grid,
                              double alpha, const std::vector<double>& wabs_sq);

}  // namespace scatter

#endif
