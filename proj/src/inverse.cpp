#include "scatter/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scatter/cauchy.hpp"
#include "scatter/numeric.hpp"

namespace scatter {

namespace {

double wrap_to_pi(double a) {
  while (a > pi) a -= 2.0 * pi;
  while (a < -pi) a += 2.0 * pi;
  return a;
}

// unwrap arg(w) from index `from` towards `to` (inclusive), writing theta
void unwrap_walk(const std::vector<cd>& w, const std::vector<bool>& ok, int from, int to,
                 std::vector<double>& theta, std::vector<bool>& set) {
  const int step = (to >= from) ? 1 : -1;
  int prev = -1;
  for (int i = from; i != to + step; i += step) {
    if (!ok[static_cast<std::size_t>(i)]) continue;
    const double raw = std::arg(w[static_cast<std::size_t>(i)]);
    if (prev < 0) {
      theta[static_cast<std::size_t>(i)] = raw;  // principal branch at the anchor
    } else {
      const double d = wrap_to_pi(raw - std::arg(w[static_cast<std::size_t>(prev)]));
      if (std::abs(d) > 0.98 * pi)
        throw Error(Errc::grid_refinement,
                    "extract_zeta: phase winds faster than the grid resolves");
      theta[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(prev)] + d;
    }
    set[static_cast<std::size_t>(i)] = true;
    prev = i;
  }
}

// cubic extrapolation from the nearest valid nodes on the given side
double extrapolate(const SpectralGrid& g, const std::vector<double>& z,
                   const std::vector<bool>& ok, int i, int dir) {
  std::vector<int> idx;
  for (int j = i + dir; j >= 0 && j < g.size() && static_cast<int>(idx.size()) < 4; j += dir)
    if (ok[static_cast<std::size_t>(j)]) idx.push_back(j);
  if (idx.empty()) return 0.0;
  double out = 0.0;
  const double t = g[i];
  for (std::size_t m = 0; m < idx.size(); ++m) {
    double L = 1.0;
    for (std::size_t q = 0; q < idx.size(); ++q)
      if (q != m) L *= (t - g[idx[q]]) / (g[idx[m]] - g[idx[q]]);
    out += L * z[static_cast<std::size_t>(idx[m])];
  }
  return out;
}

// strips the detected pi-jumps at the zeros so that the PV quadrature only
// ever sees a continuous density
DensitySamples zeta_smooth_density(const ScatteringData& data,
                                   const std::vector<int>& jumps) {
  std::vector<cd> vals(static_cast<std::size_t>(data.grid.size()));
  for (int i = 0; i < data.grid.size(); ++i) {
    const double lam = data.grid[i];
    const double sgn = (lam > 0.0) ? 1.0 : (lam < 0.0 ? -1.0 : 0.0);
    double v = data.zeta[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < data.real_zeros.size(); ++k)
      if (std::abs(lam) < data.real_zeros[k]) v += pi * jumps[k] * sgn;
    vals[static_cast<std::size_t>(i)] = v;
  }
  return DensitySamples(data.grid, std::move(vals), 3.0, Parity::odd);
}

}  // namespace

std::vector<int> ScatteringData::zero_jumps() const {
  std::vector<int> out;
  const int i0 = grid.zero_index();
  const int N = grid.size();
  for (double z : real_zeros) {
    // nearest samples outside the flagged window around the zero
    int il = -1, ir = -1;
    for (int i = i0 + 1; i < N; ++i) {
      if (grid[i] < z && !grid.flagged(grid[i])) il = i;
      if (grid[i] > z && !grid.flagged(grid[i])) {
        ir = i;
        break;
      }
    }
    if (il < 0 || ir < 0) {
      out.push_back(0);
      continue;
    }
    const double dj = (zeta[static_cast<std::size_t>(ir)] -
                       zeta[static_cast<std::size_t>(il)]) /
                      pi;
    out.push_back(static_cast<int>(std::lround(dj)));
  }
  return out;
}

ScatteringData extract_zeta(const SpectralGrid& grid, const std::vector<cd>& samples,
                            PhaseInput kind, const std::vector<double>& real_zeros,
                            const std::vector<double>& kappas) {
  if (static_cast<int>(samples.size()) != grid.size())
    throw Error(Errc::data, "extract_zeta: sample count mismatch");
  const int N = grid.size();
  const int i0 = grid.zero_index();

  // w = e^{2 i zeta_cont}: insensitive to the pi ambiguities of B+- data
  std::vector<cd> w(static_cast<std::size_t>(N));
  std::vector<bool> ok(static_cast<std::size_t>(N), false);
  for (int i = 0; i < N; ++i) {
    const cd s = samples[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || std::abs(s) == 0.0)
      continue;
    cd u;
    switch (kind) {
      case PhaseInput::s_samples: u = std::conj(s) / std::abs(s); break;
      case PhaseInput::b_plus: u = s / std::conj(s); break;
      case PhaseInput::b_minus: u = std::conj(s) / s; break;
    }
    w[static_cast<std::size_t>(i)] = u / std::abs(u);
    ok[static_cast<std::size_t>(i)] = (i != i0);
  }

  std::vector<double> theta(static_cast<std::size_t>(N), 0.0);
  std::vector<bool> set(static_cast<std::size_t>(N), false);
  unwrap_walk(w, ok, N - 1, i0 + 1, theta, set);  // right half, anchored at +Lambda
  unwrap_walk(w, ok, 0, i0 - 1, theta, set);      // left half, anchored at -Lambda

  // odd symmetrization of zeta = theta / 2
  ScatteringData data;
  data.grid = grid;
  data.zeta.assign(static_cast<std::size_t>(N), 0.0);
  data.valid.assign(static_cast<std::size_t>(N), false);
  for (int i = i0 + 1; i < N; ++i) {
    const int mi = grid.mirror(i);
    const bool a = set[static_cast<std::size_t>(i)];
    const bool b = set[static_cast<std::size_t>(mi)];
    double z;
    if (a && b)
      z = 0.5 * (theta[static_cast<std::size_t>(i)] / 2.0 -
                 theta[static_cast<std::size_t>(mi)] / 2.0);
    else if (a)
      z = theta[static_cast<std::size_t>(i)] / 2.0;
    else if (b)
      z = -theta[static_cast<std::size_t>(mi)] / 2.0;
    else
      continue;
    data.zeta[static_cast<std::size_t>(i)] = z;
    data.zeta[static_cast<std::size_t>(mi)] = -z;
    data.valid[static_cast<std::size_t>(i)] = true;
    data.valid[static_cast<std::size_t>(mi)] = true;
  }

  // fill unresolved interior gaps; interior gaps interpolate from both
  // sides with any pi-multiple branch offset removed first, edge gaps
  // extrapolate from the available side
  for (int i = i0 + 1; i < N; ++i) {
    if (data.valid[static_cast<std::size_t>(i)]) continue;
    int il = -1, ir = -1;
    for (int j = i - 1; j > i0; --j)
      if (data.valid[static_cast<std::size_t>(j)]) {
        il = j;
        break;
      }
    for (int j = i + 1; j < N; ++j)
      if (data.valid[static_cast<std::size_t>(j)]) {
        ir = j;
        break;
      }
    double z;
    if (il >= 0 && ir >= 0) {
      const double zl = data.zeta[static_cast<std::size_t>(il)];
      const double zr = data.zeta[static_cast<std::size_t>(ir)];
      const double off = pi * std::lround((zr - zl) / pi);
      const double t = (grid[i] - grid[il]) / (grid[ir] - grid[il]);
      z = zl + t * (zr - off - zl);
      if (grid[i] >= 0.5 * (grid[il] + grid[ir])) z += off;
    } else {
      z = extrapolate(grid, data.zeta, data.valid, i, il >= 0 ? -1 : +1);
    }
    data.zeta[static_cast<std::size_t>(i)] = z;
    data.zeta[static_cast<std::size_t>(grid.mirror(i))] = -z;
  }
  data.zeta[static_cast<std::size_t>(i0)] = 0.0;

  data.real_zeros = real_zeros;
  std::sort(data.real_zeros.begin(), data.real_zeros.end());
  data.kappas = kappas;
  data.tag = kappas.empty()
                 ? (real_zeros.empty() ? DataClass::omega0 : DataClass::omega_q)
                 : DataClass::omega_q_kappa;

  // boundary-value inputs admit a direct arctan cross-check of the branch
  // (tan is pi-periodic, so this is insensitive to the jump bookkeeping)
  if (kind != PhaseInput::s_samples) {
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      if (!data.valid[static_cast<std::size_t>(i)]) continue;
      cd b = samples[static_cast<std::size_t>(i)];
      if (kind == PhaseInput::b_minus) b = std::conj(b);
      if (std::abs(b.real()) < 1e-6 * std::abs(b)) continue;
      worst = std::max(worst, std::abs(std::tan(data.zeta[static_cast<std::size_t>(i)]) -
                                       b.imag() / b.real()));
    }
    if (worst > 1e-2)
      throw Error(Errc::data,
                  "extract_zeta: unwrapped phase disagrees with the boundary samples");
  }
  return data;
}

namespace {

double phase_exponential_from(const DensitySamples& dens, const ScatteringData& data,
                              const std::vector<int>& jumps, double lambda) {
  double ex = pv_integral(dens, lambda).real() / pi;
  double H = std::exp(ex);
  for (std::size_t k = 0; k < data.real_zeros.size(); ++k) {
    if (jumps[k] == 0) continue;
    const double z = data.real_zeros[k];
    const double d = std::abs(lambda * lambda - z * z);
    if (d == 0.0) return 0.0;
    H *= std::pow(d / (lambda * lambda), -jumps[k]);
  }
  return H;
}

}  // namespace

double phase_exponential(const ScatteringData& data, double lambda) {
  const std::vector<int> jumps = data.zero_jumps();
  return phase_exponential_from(zeta_smooth_density(data, jumps), data, jumps, lambda);
}

double aux_psi(double lambda, double kappa) {
  if (!(kappa > 0.0)) throw Error(Errc::domain, "aux_psi: kappa must be positive");
  const double t0 = std::abs(lambda);
  if (t0 < 1e-6) throw Error(Errc::domain, "aux_psi: lambda too close to 0");

  // PV int_0^inf atan(kappa/t) 2t/(t^2-lambda^2) dt with closed-form density
  auto theta = [kappa](double t) { return std::atan2(kappa, t); };
  const double T = std::max({60.0, 30.0 * kappa, 3.0 * t0});
  const double th0 = theta(t0);
  auto reg = [&](double t) -> cd {
    const double d = t * t - t0 * t0;
    if (std::abs(t - t0) < 1e-9) {
      const double dth = -kappa / (t0 * t0 + kappa * kappa);
      return dth;
    }
    return (theta(t) - th0) * 2.0 * t / d;
  };
  double head = adaptive_integrate(reg, 0.0, t0, 1e-10).real() +
                adaptive_integrate(reg, t0, T, 1e-10).real();
  head += th0 * std::log((T * T - t0 * t0) / (t0 * t0));

  // tail on [T, M e^u] by log-GL plus the analytic remainder of atan ~ kappa/t
  auto tail_f = [&](double u) -> cd {
    const double t = T * std::exp(u);
    return theta(t) * 2.0 * t / (t * t - t0 * t0) * t;
  };
  const double U = std::log(1e6 / T);
  head += integrate_gl(tail_f, 0.0, U, 32, 12).real();
  head += 2.0 * kappa / 1e6;

  // head is the full-line PV of the odd density (folded form); the exponent
  // carries the 2/pi prefactor
  return std::exp(2.0 * head / pi) / (lambda * lambda + kappa * kappa);
}

std::vector<double> reconstruct_Wsq_shape(const ScatteringData& data) {
  const int N = data.grid.size();
  const int i0 = data.grid.zero_index();
  const int q = data.q();
  const bool bound = !data.kappas.empty();
  const double kappa = bound ? data.kappas.front() : 0.0;
  const std::vector<int> jumps = data.zero_jumps();
  const DensitySamples dens = zeta_smooth_density(data, jumps);

  std::vector<double> shape(static_cast<std::size_t>(N), 0.0);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (i < 2 || i > N - 3) return;  // edge nodes are extrapolated below
    const double lam = data.grid[i];
    if (i == i0 || lam == 0.0) return;
    // nodes pinned to a real zero contribute |W|^2 = 0 exactly
    for (double z : data.real_zeros)
      if (std::abs(std::abs(lam) - z) < data.grid.flag_radius()) return;
    // base factor lambda sin(zeta) H with the staircase folded analytically
    const double H = phase_exponential_from(dens, data, jumps, lam);
    double val = lam * std::sin(data.zeta[ii]) * H;
    if (q > 0) {
      double prod = 1.0;
      for (double z : data.real_zeros) prod *= (lam * lam - z * z);
      val *= prod * std::pow(aux_psi(lam, 1.0), q);
    }
    if (bound) val *= (lam * lam + kappa * kappa) * aux_psi(lam, 1.0);
    shape[ii] = val;
  });
  // quadratic continuation at the span edges (outside the PV domain)
  for (int i : {1, 0}) {
    shape[static_cast<std::size_t>(i)] = 3.0 * shape[static_cast<std::size_t>(i + 1)] -
                                         3.0 * shape[static_cast<std::size_t>(i + 2)] +
                                         shape[static_cast<std::size_t>(i + 3)];
    const int m = N - 1 - i;
    shape[static_cast<std::size_t>(m)] = 3.0 * shape[static_cast<std::size_t>(m - 1)] -
                                         3.0 * shape[static_cast<std::size_t>(m - 2)] +
                                         shape[static_cast<std::size_t>(m - 3)];
  }
  return shape;
}

double reconstruct_alpha(const ScatteringData& data, const std::vector<double>& shape,
                         bool legacy) {
  const auto& w = data.grid.quad_weights();
  std::vector<double> terms(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) terms[i] = w[i] * shape[i];
  double head = pairwise_sum(std::span<const double>(terms));

  // even tail ~ c0/t^2 + c1/t^4 beyond the grid
  const int i0 = data.grid.zero_index();
  const int nh = data.grid.half_size();
  const int m = std::max(6, nh / 20);
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (int j = nh - m; j < nh; ++j) {
    const double t = data.grid[i0 + j];
    const double y = shape[static_cast<std::size_t>(i0 + j)];
    const double f1 = 1.0 / (t * t), f2 = f1 / (t * t);
    s11 += f1 * f1;
    s12 += f1 * f2;
    s22 += f2 * f2;
    b1 += f1 * y;
    b2 += f2 * y;
  }
  const double det = s11 * s22 - s12 * s12;
  double c0 = 0.0, c1 = 0.0;
  if (std::abs(det) > 1e-300) {
    c0 = (s22 * b1 - s12 * b2) / det;
    c1 = (s11 * b2 - s12 * b1) / det;
  }
  const double L = data.grid.lambda_max();
  head += 2.0 * (c0 / L + c1 / (3.0 * L * L * L));

  if (std::abs(head) < 1e-10)
    throw Error(Errc::degenerate_data, "reconstruct_alpha: the phase carries no data");
  // Parseval-calibrated constant; the legacy variant keeps the uncorrected
  // half-line prefactor pi/2 for comparison
  return legacy ? (0.25 * pi * pi) * (head / pi) : head / pi;
}

ReconstructionResult reconstruct(const ScatteringData& data,
                                 const ReconstructionOptions& opts) {
  const std::vector<double> shape = reconstruct_Wsq_shape(data);
  ReconstructionResult out;
  out.alpha = reconstruct_alpha(data, shape, false);
  out.alpha_legacy = reconstruct_alpha(data, shape, true);

  const int N = data.grid.size();
  out.Wabs_sq.assign(static_cast<std::size_t>(N), 0.0);
  double wmax = 0.0;
  for (int i = 0; i < N; ++i)
    wmax = std::max(wmax, std::abs(4.0 / out.alpha * shape[static_cast<std::size_t>(i)]));
  int bad = 0;
  for (int i = 0; i < N; ++i) {
    double v = 4.0 / out.alpha * shape[static_cast<std::size_t>(i)];
    if (v < -1e-6 * wmax) ++bad;
    if (v < 0.0) {
      out.floor_magnitude = std::max(out.floor_magnitude, -v);
      v = 0.0;
    }
    out.Wabs_sq[static_cast<std::size_t>(i)] = v;
  }
  if (bad > std::max(2, N / 200))
    throw Error(Errc::inconsistent_data,
                "reconstruct: |W|^2 negative on a set of positive measure; "
                "data is not in the stated class");

  std::vector<double> xg = opts.xgrid;
  if (xg.empty()) {
    xg.resize(801);
    for (std::size_t j = 0; j < xg.size(); ++j) xg[j] = 40.0 * j / (xg.size() - 1);
  }
  std::vector<double> wabs(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i)
    wabs[static_cast<std::size_t>(i)] = std::sqrt(out.Wabs_sq[static_cast<std::size_t>(i)]);
  out.v_candidate = inverse_sine_recover_v(wabs, data.grid, xg);
  out.v_norm = out.v_candidate.l2_norm();
  return out;
}

ClassDiagnostics validate_class(const ScatteringData& data) {
  ClassDiagnostics d;
  const int N = data.grid.size();
  const int i0 = data.grid.zero_index();
  const int nh = data.grid.half_size();

  for (int i = 0; i < N; ++i)
    d.odd_error = std::max(d.odd_error,
                           std::abs(data.zeta[static_cast<std::size_t>(i)] +
                                    data.zeta[static_cast<std::size_t>(data.grid.mirror(i))]));

  // compensated phase zeta + 2(q + #kappa) atan(1/lambda) should be
  // single-signed; record its minimum against the dominant sign
  const int qq = data.q() + static_cast<int>(data.kappas.size());
  double pos = 0.0, neg = 0.0;
  d.comp_phase_min = 1e300;
  for (int j = 1; j < nh; ++j) {
    const int i = i0 + j;
    const double lam = data.grid[i];
    if (data.grid.flagged(lam)) continue;
    const double zq = data.zeta[static_cast<std::size_t>(i)] + 2.0 * qq * std::atan(1.0 / lam);
    pos = std::max(pos, zq);
    neg = std::min(neg, zq);
  }
  const bool positive_branch = pos >= -neg;
  d.comp_phase_min = positive_branch ? -neg : -pos;  // worst violation of the sign
  d.sign_uniform = (positive_branch ? -neg : pos) < 1e-6 + 0.02 * std::max(pos, -neg);

  // decay exponent of |zeta| from the trailing decade
  {
    int j1 = nh - std::max(6, nh / 10), j2 = nh - 1;
    const double z1 = std::abs(data.zeta[static_cast<std::size_t>(i0 + j1)]) + 1e-300;
    const double z2 = std::abs(data.zeta[static_cast<std::size_t>(i0 + j2)]) + 1e-300;
    const double t1 = data.grid[i0 + j1], t2 = data.grid[i0 + j2];
    d.tail_decay_exponent = std::log(z1 / z2) / std::log(t2 / t1);
    const double L = data.grid.lambda_max();
    const double C = z2 * std::pow(t2, d.tail_decay_exponent);
    d.lambda_zeta_integrable = d.tail_decay_exponent > 2.05;
    d.tail_integral_est = d.lambda_zeta_integrable
                              ? C * std::pow(L, 2.0 - d.tail_decay_exponent) /
                                    (d.tail_decay_exponent - 2.0)
                              : 1e300;
  }

  // continuity off the zero set
  for (int j = 2; j < nh; ++j) {
    const int i = i0 + j;
    const double lam = data.grid[i];
    if (data.grid.flagged(lam)) continue;
    bool near_zero = false;
    for (double z : data.real_zeros)
      near_zero = near_zero || std::abs(lam - z) < 2.5 * data.grid.spacing() ||
                  std::abs(data.grid[i - 1] - z) < 2.5 * data.grid.spacing();
    if (near_zero) continue;
    d.max_offzero_jump =
        std::max(d.max_offzero_jump, std::abs(data.zeta[static_cast<std::size_t>(i)] -
                                              data.zeta[static_cast<std::size_t>(i - 1)]));
  }

  // sampled smoothness integral (the derivative-weighted class condition),
  // excluding neighborhoods where sin(zeta) ~ 0
  {
    const double h = data.grid.spacing();
    std::vector<double> terms;
    for (int j = 2; j + 1 < nh; ++j) {
      const int i = i0 + j;
      const double lam = data.grid[i];
      const double z = data.zeta[static_cast<std::size_t>(i)];
      if (std::abs(std::sin(z)) < 1e-3) continue;
      const double dz = (data.zeta[static_cast<std::size_t>(i + 1)] -
                         data.zeta[static_cast<std::size_t>(i - 1)]) /
                        (2.0 * h);
      double Q = 1.0;
      for (double zz : data.real_zeros)
        Q *= (lam * lam - zz * zz) / (lam * lam + 1.0);
      if (!data.kappas.empty())
        Q *= (lam * lam + data.kappas.front() * data.kappas.front()) / (lam * lam + 1.0);
      const double c = std::cos(z) / std::sin(z);
      terms.push_back(std::abs(lam * Q * dz * dz * c * c * std::sin(z)) * h);
    }
    d.smoothness_integral = pairwise_sum(std::span<const double>(terms));
  }

  d.approximate = true;
  d.all_pass = d.odd_error < 1e-9 && d.sign_uniform && d.lambda_zeta_integrable &&
               std::isfinite(d.smoothness_integral);

  std::ostringstream os;
  os << "oddness max error        " << d.odd_error << "\n"
     << "sign uniform             " << (d.sign_uniform ? "yes" : "NO")
     << " (worst excursion " << d.comp_phase_min << ")\n"
     << "tail decay exponent      " << d.tail_decay_exponent
     << (d.lambda_zeta_integrable ? " (lambda*zeta integrable)" : " (NOT integrable)")
     << "\n"
     << "tail integral estimate   " << d.tail_integral_est << "\n"
     << "max off-zero jump        " << d.max_offzero_jump << "\n"
     << "smoothness integral      " << d.smoothness_integral << " (approximate)\n";
  d.report = os.str();
  return d;
}

std::vector<ReconstructionResult> invert_channels(
    const std::vector<std::vector<cd>>& Sk, const SpectralGrid& grid,
    const std::vector<std::vector<double>>& zeros_per_channel,
    const std::vector<std::vector<double>>& kappas_per_channel,
    const ReconstructionOptions& opts) {
  std::vector<ReconstructionResult> out;
  for (std::size_t k = 0; k < Sk.size(); ++k) {
    const auto& zeros =
        k < zeros_per_channel.size() ? zeros_per_channel[k] : std::vector<double>();
    const auto& kap =
        k < kappas_per_channel.size() ? kappas_per_channel[k] : std::vector<double>();
    ScatteringData data = extract_zeta(grid, Sk[k], PhaseInput::s_samples, zeros, kap);
    out.push_back(reconstruct(data, opts));
  }
  return out;
}

double perron_stieltjes_check(const std::vector<cd>& b_plus, const SpectralGrid& grid,
                              double alpha, const std::vector<double>& wabs_sq) {
  if (b_plus.size() != wabs_sq.size() ||
      static_cast<int>(b_plus.size()) != grid.size())
    throw Error(Errc::data, "perron_stieltjes_check: sample count mismatch");
  double res = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double lam = grid[i];
    if (grid.flagged(lam)) continue;
    const cd b = b_plus[static_cast<std::size_t>(i)];
    if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) continue;
    res = std::max(res, std::abs(4.0 * lam / alpha * b.imag() -
                                 wabs_sq[static_cast<std::size_t>(i)]));
  }
  return res;
}

}  // namespace scatter
