#include "scatter/forward.hpp"

#include <algorithm>
#include <cmath>

#include "scatter/numeric.hpp"

namespace scatter {

namespace {

constexpr double kZeroDetTol = 1e-8;

Eigen::VectorXcd vt_star_column(const TransformSet& ts, int i) {
  const int n = ts.n();
  Eigen::VectorXcd v(n);
  for (int k = 0; k < n; ++k) v(k) = std::conj(ts.vt_at(k, i));
  return v;
}

// coefficient system at one node given varphi samples
void solve_node(const SeparablePotential& pot, const Eigen::MatrixXcd& phi_sk,
                const Eigen::VectorXcd& vtstar, cd* e0, Eigen::VectorXcd* ek,
                bool* ok) {
  const int n = pot.n();
  Eigen::MatrixXcd C(n, n);
  for (int k = 0; k < n; ++k)
    for (int s = 0; s < n; ++s)
      C(k, s) = (k == s ? 1.0 : 0.0) - pot.alpha(s) * phi_sk(s, k);
  const cd det = C.determinant();
  *e0 = (n % 2 == 0 ? 1.0 : -1.0) * det;
  if (std::abs(det) < kZeroDetTol) {
    *ok = false;
    ek->setZero(n);
    return;
  }
  *ok = true;
  *ek = *e0 * C.partialPivLu().solve(vtstar);
}

// partial transforms int_0^x e^{+- i lam t} v(t) dt
struct PartialPair {
  cd plus;   // int_0^x e^{+i lam t} v dt
  cd minus;  // int_0^x e^{-i lam t} v dt
};

PartialPair partial_transforms(const HalfLineFunction& v, double lam, double x) {
  PartialPair out{0.0, 0.0};
  if (x <= 0.0) return out;
  const int panels = std::max(4, static_cast<int>(x / std::min(0.4, 2.8 / std::max(1.0, std::abs(lam)))) + 1);
  auto fp = [&](double t) -> cd { return std::exp(iu * lam * t) * v.eval(t); };
  auto fm = [&](double t) -> cd { return std::exp(-iu * lam * t) * v.eval(t); };
  out.plus = integrate_gl(fp, 0.0, x, panels, 10);
  out.minus = integrate_gl(fm, 0.0, x, panels, 10);
  return out;
}

}  // namespace

cd ScatteringProfile::S_at(int i) const {
  if (flagged[static_cast<std::size_t>(i)])
    throw Error(Errc::zero_set, "S: lambda lies inside a flagged zero neighborhood");
  return S[static_cast<std::size_t>(i)];
}

cd ScatteringProfile::Sk_at(int k, int i) const {
  if (flagged[static_cast<std::size_t>(i)])
    throw Error(Errc::zero_set, "S_k: lambda lies inside a flagged zero neighborhood");
  return Sk[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
}

std::vector<std::vector<std::vector<cd>>> varphi_matrix(const TransformSet& ts) {
  const int n = ts.n();
  std::vector<std::vector<std::vector<cd>>> out(
      static_cast<std::size_t>(n),
      std::vector<std::vector<cd>>(static_cast<std::size_t>(n)));
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k)
      out[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] =
          varphi_grid(ts.pot.v(s), ts.pot.v(k), ts.grid);
  return out;
}

Eigen::MatrixXcd resolvent_boundary(const TransformSet& ts, int i, Side side) {
  const int n = ts.n();
  const double lam = ts.grid[i];
  if (lam == 0.0) throw Error(Errc::domain, "resolvent_boundary: lambda = 0");
  const int mi = ts.grid.mirror(i);
  Eigen::MatrixXcd G(n, n);
  if (side == Side::plus) {
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        G(s, k) = (ts.vt_at(k, mi) * std::conj(ts.vt_at(s, i)) -
                   std::conj(ts.Phi_at(k, s, i)) - ts.Phi_at(s, k, mi)) /
                  (2.0 * iu * lam);
  } else {
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        G(s, k) = -(ts.vt_at(k, i) * std::conj(ts.vt_at(s, mi)) -
                    std::conj(ts.Phi_at(k, s, mi)) - ts.Phi_at(s, k, i)) /
                  (2.0 * iu * lam);
  }
  return G;
}

JostAssembly assemble_jost(const SeparablePotential& pot, const TransformSet& ts) {
  const int n = pot.n();
  const int N = ts.grid.size();
  JostAssembly ja;
  ja.grid = ts.grid;
  ja.varphi = varphi_matrix(ts);
  ja.e0.resize(static_cast<std::size_t>(N));
  ja.ek.assign(static_cast<std::size_t>(n), std::vector<cd>(static_cast<std::size_t>(N)));
  ja.coeff_valid.assign(static_cast<std::size_t>(N), true);

  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXcd phi_sk(n, n);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        phi_sk(s, k) = ja.varphi[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]
                                 [static_cast<std::size_t>(i)];
    cd e0;
    Eigen::VectorXcd ek(n);
    bool ok;
    solve_node(pot, phi_sk, vt_star_column(ts, i), &e0, &ek, &ok);
    ja.e0[static_cast<std::size_t>(i)] = e0;
    ja.coeff_valid[static_cast<std::size_t>(i)] = ok;
    for (int k = 0; k < n; ++k)
      ja.ek[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = ek(k);
  }

  // locate real zeros of e0 on the positive half: local minima of |e0|
  const int i0 = ts.grid.zero_index();
  auto e0_point = [&](double lam) -> cd {
    Eigen::MatrixXcd C(n, n);
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < n; ++s)
        C(k, s) = (k == s ? 1.0 : 0.0) -
                  pot.alpha(s) * varphi_point(pot.v(s), pot.v(k), lam);
    return (n % 2 == 0 ? 1.0 : -1.0) * C.determinant();
  };
  for (int i = i0 + 1; i + 1 < N; ++i) {
    const double a0 = std::abs(ja.e0[static_cast<std::size_t>(i - 1)]);
    const double a1 = std::abs(ja.e0[static_cast<std::size_t>(i)]);
    const double a2 = std::abs(ja.e0[static_cast<std::size_t>(i + 1)]);
    if (a1 <= a0 && a1 <= a2 && a1 < 0.05) {
      // golden-section polish of |e0|
      double lo = ts.grid[i - 1], hi = ts.grid[i + 1];
      for (int it = 0; it < 80; ++it) {
        const double m1 = lo + 0.381966 * (hi - lo);
        const double m2 = hi - 0.381966 * (hi - lo);
        if (std::abs(e0_point(m1)) < std::abs(e0_point(m2)))
          hi = m2;
        else
          lo = m1;
      }
      const double lam0 = 0.5 * (lo + hi);
      if (std::abs(e0_point(lam0)) < 1e-6) ja.Ealpha.push_back(lam0);
    }
  }
  return ja;
}

JostPoint jost_point(const SeparablePotential& pot, double lam) {
  const int n = pot.n();
  Eigen::MatrixXcd phi_sk(n, n);
  Eigen::VectorXcd vtstar(n);
  for (int s = 0; s < n; ++s) {
    vtstar(s) = std::conj(pot.v(s).vtilde_real(lam));
    for (int k = 0; k < n; ++k) phi_sk(s, k) = varphi_point(pot.v(s), pot.v(k), lam);
  }
  JostPoint jp;
  bool ok;
  solve_node(pot, phi_sk, vtstar, &jp.e0, &jp.ek, &ok);
  if (!ok) throw Error(Errc::zero_set, "jost_point: lambda lies in the zero set of e0");
  return jp;
}

cd psi_k(const HalfLineFunction& v, double lam, double x) {
  if (x < 0.0) throw Error(Errc::domain, "psi_k: x must be >= 0");
  if (lam == 0.0) {
    // int_x^inf (t-x) v(t) dt, fast-decay only
    if (!v.fast_decay()) throw Error(Errc::domain, "psi_k: lambda = 0 with slow kernel");
    auto f = [&](double t) -> cd { return (t - x) * v.eval(t); };
    return adaptive_integrate(f, x, v.x_max(), 1e-11);
  }
  const PartialPair P = partial_transforms(v, lam, x);
  const cd vt_mlam = v.vtilde_real(-lam);  // int_0^inf e^{+i lam t} v dt
  const cd W = -2.0 * iu * ((lam >= 0.0) ? v.sine_transform(lam)
                                         : -v.sine_transform(-lam));
  const cd phase = std::exp(iu * lam * x);
  cd out = -phase * (P.plus - P.minus) / (2.0 * iu * lam);
  out -= sinc_lam(lam, x) * (vt_mlam - P.plus);
  out -= phase * W / (2.0 * iu * lam);
  return out;
}

cd psi_k_deriv(const HalfLineFunction& v, double lam, double x) {
  if (x < 0.0) throw Error(Errc::domain, "psi_k_deriv: x must be >= 0");
  const PartialPair P = partial_transforms(v, lam, x);
  const cd vt_mlam = v.vtilde_real(-lam);
  const cd vt_plam = v.vtilde_real(lam);
  const cd em = std::exp(-iu * lam * x);
  const cd ep = std::exp(iu * lam * x);
  return -0.5 * (em * (vt_mlam - P.plus) + ep * (vt_plam - P.minus));
}

cd jost_solution(const JostAssembly& ja, const SeparablePotential& pot, double lam,
                 double x) {
  for (double z : ja.Ealpha)
    if (std::abs(std::abs(lam) - z) < ja.grid.flag_radius())
      throw Error(Errc::zero_set, "jost_solution: lambda in the zero set of e0");
  const JostPoint jp = jost_point(pot, lam);
  cd out = std::exp(iu * lam * x) * jp.e0;
  for (int k = 0; k < pot.n(); ++k)
    out += pot.alpha(k) * jp.ek(k) * psi_k(pot.v(k), lam, x);
  return out;
}

cd jost_solution_deriv(const JostAssembly& ja, const SeparablePotential& pot, double lam,
                       double x) {
  for (double z : ja.Ealpha)
    if (std::abs(std::abs(lam) - z) < ja.grid.flag_radius())
      throw Error(Errc::zero_set, "jost_solution_deriv: lambda in the zero set of e0");
  const JostPoint jp = jost_point(pot, lam);
  cd out = iu * lam * std::exp(iu * lam * x) * jp.e0;
  for (int k = 0; k < pot.n(); ++k)
    out += pot.alpha(k) * jp.ek(k) * psi_k_deriv(pot.v(k), lam, x);
  return out;
}

Eigen::MatrixXcd r_matrix(const TransformSet& ts, int i) {
  const int n = ts.n();
  const double lam = ts.grid[i];
  const int mi = ts.grid.mirror(i);
  Eigen::MatrixXcd R(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      R(j, k) = std::conj(ts.Phi_at(k, j, i)) + ts.Phi_at(j, k, mi) -
                std::conj(ts.vt_at(j, i)) * ts.vt_at(k, mi);
      if (j == k) R(j, k) -= 2.0 * iu * lam / ts.pot.alpha(j);
    }
  return R;
}

cd r_point(const SeparablePotential& pot, double lam) {
  const int n = pot.n();
  Eigen::MatrixXcd R(n, n);
  for (int j = 0; j < n; ++j) {
    const cd vtj = pot.v(j).vtilde_real(lam);
    for (int k = 0; k < n; ++k) {
      R(j, k) = std::conj(Phi_point(pot.v(k), pot.v(j), cd(lam, 0.0))) +
                Phi_point(pot.v(j), pot.v(k), cd(-lam, 0.0)) -
                std::conj(vtj) * pot.v(k).vtilde_real(-lam);
      if (j == k) R(j, k) -= 2.0 * iu * lam / pot.alpha(j);
    }
  }
  return R.determinant();
}

BkChain bk_chain_from(const Eigen::MatrixXcd& T0, const Eigen::VectorXd& alpha) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXcd G = T0;
  BkChain out;
  out.bk.resize(static_cast<std::size_t>(n));
  out.product = 1.0;
  for (int j = 0; j < n; ++j) {
    const cd den = 1.0 + alpha(j) * G(j, j);
    out.bk[static_cast<std::size_t>(j)] = den;
    out.product *= den;
    if (j + 1 == n) break;
    if (std::abs(den) < 1e-12)
      throw Error(Errc::pole, "bk_chain: vanishing denominator at channel " +
                                  std::to_string(j + 1));
    Eigen::MatrixXcd next = G;
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        next(s, k) = G(s, k) - alpha(j) * G(j, k) * G(s, j) / den;
    G = next;
  }
  return out;
}

ResolventMatrix resolvent_T(const TransformSet& ts, cd z) {
  if (z.imag() == 0.0)
    throw Error(Errc::domain, "resolvent_T: z must lie off the real axis");
  cd lam = std::sqrt(z);
  if (lam.imag() < 0.0) lam = -lam;
  const int n = ts.n();
  ResolventMatrix out;
  out.z = z;
  out.T.resize(n, n);
  out.alpha.resize(n);
  for (int k = 0; k < n; ++k) out.alpha(k) = ts.pot.alpha(k);
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k) {
      const cd vk_m = ts.pot.v(k).vtilde(-lam);
      const cd vs_star = std::conj(ts.pot.v(s).vtilde(std::conj(lam)));
      const cd phi_ks_star = std::conj(Phi_point(ts.pot.v(k), ts.pot.v(s), std::conj(lam)));
      const cd phi_sk_m = Phi_point(ts.pot.v(s), ts.pot.v(k), -lam);
      out.T(s, k) = (vk_m * vs_star - phi_ks_star - phi_sk_m) / (2.0 * iu * lam);
    }
  return out;
}

BkChain bk_chain(const SeparablePotential& pot, const TransformSet& ts, cd z) {
  const ResolventMatrix rm = resolvent_T(ts, z);
  Eigen::VectorXd alpha(pot.n());
  for (int k = 0; k < pot.n(); ++k) alpha(k) = pot.alpha(k);
  return bk_chain_from(rm.T, alpha);
}

ScatteringProfile scattering_profile(const SeparablePotential& pot, const TransformSet& ts) {
  const int n = pot.n();
  const int N = ts.grid.size();
  const int i0 = ts.grid.zero_index();
  ScatteringProfile pr;
  pr.grid = ts.grid;
  pr.r.resize(static_cast<std::size_t>(N));
  pr.S.assign(static_cast<std::size_t>(N), cd(std::nan(""), std::nan("")));
  pr.Sk.assign(static_cast<std::size_t>(n),
               std::vector<cd>(static_cast<std::size_t>(N), cd(std::nan(""), std::nan(""))));
  pr.bk_plus.assign(static_cast<std::size_t>(n),
                    std::vector<cd>(static_cast<std::size_t>(N), cd(std::nan(""), std::nan(""))));
  pr.bk_minus = pr.bk_plus;
  pr.flagged.assign(static_cast<std::size_t>(N), false);

  for (int i = 0; i < N; ++i) pr.r[static_cast<std::size_t>(i)] = r_matrix(ts, i).determinant();

  // real zeros of r: scan |r|/lambda minima on the positive half (r always
  // vanishes linearly at the origin, which is not a listed zero) and polish
  const double h = ts.grid.spacing();
  std::vector<double> q(static_cast<std::size_t>(N), 0.0);
  double qmed = 0.0;
  {
    std::vector<double> pos;
    for (int i = i0 + 1; i < N; ++i) {
      q[static_cast<std::size_t>(i)] =
          std::abs(pr.r[static_cast<std::size_t>(i)]) / std::max(std::abs(ts.grid[i]), h);
      pos.push_back(q[static_cast<std::size_t>(i)]);
    }
    std::nth_element(pos.begin(), pos.begin() + pos.size() / 2, pos.end());
    qmed = pos[pos.size() / 2];
  }
  for (int i = i0 + 3; i + 1 < N; ++i) {
    if (ts.grid[i] < 8.0 * h) continue;
    const double a0 = q[static_cast<std::size_t>(i - 1)];
    const double a1 = q[static_cast<std::size_t>(i)];
    const double a2 = q[static_cast<std::size_t>(i + 1)];
    // deep dip of |r|, or the phase of r flipping by more than pi/2 across
    // one cell (a zero passing close to the axis)
    const bool dip = a1 <= a0 && a1 <= a2 && a1 < 1e-2 * qmed;
    const bool flip = std::real(pr.r[static_cast<std::size_t>(i + 1)] *
                                std::conj(pr.r[static_cast<std::size_t>(i)])) < 0.0 &&
                      a1 < 0.5 * qmed;
    if (dip || flip) {
      double lo = ts.grid[i - 1], hi = ts.grid[i + 1];
      for (int it = 0; it < 48; ++it) {
        const double m1 = lo + 0.381966 * (hi - lo);
        const double m2 = hi - 0.381966 * (hi - lo);
        if (std::abs(r_point(pot, m1)) < std::abs(r_point(pot, m2)))
          hi = m2;
        else
          lo = m1;
      }
      const double lam0 = 0.5 * (lo + hi);
      if (std::abs(r_point(pot, lam0)) < 1e-6 * qmed * std::abs(lam0)) {
        if (!pr.real_zeros.empty()) {
          const double gap = lam0 - pr.real_zeros.back();
          if (gap < 0.5 * h) continue;  // same zero reached from the next cell
          if (gap < 3.0 * h)
            throw Error(Errc::grid_refinement,
                        "scattering_profile: unresolved zero cluster near lambda = " +
                            std::to_string(lam0));
        }
        pr.real_zeros.push_back(lam0);
      }
    }
  }
  for (double z : pr.real_zeros) pr.grid.add_mark(z);

  auto is_flagged = [&](double lam) {
    if (std::abs(lam) < pr.grid.flag_radius()) return true;
    for (double z : pr.real_zeros)
      if (std::abs(std::abs(lam) - z) < pr.grid.flag_radius()) return true;
    return false;
  };

  Eigen::VectorXd alpha(n);
  for (int k = 0; k < n; ++k) alpha(k) = pot.alpha(k);
  const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;

  // flagged nodes are excluded from every stated check, but the sample
  // arrays still carry values wherever the ratios are numerically sound so
  // that downstream phase extraction keeps its resolution near the zeros
  double rfloor = 0.0;
  for (int i = 0; i < N; ++i) rfloor = std::max(rfloor, std::abs(pr.r[static_cast<std::size_t>(i)]));
  rfloor *= 1e-12;
  for (int i = 0; i < N; ++i) {
    const double lam = ts.grid[i];
    pr.flagged[static_cast<std::size_t>(i)] = is_flagged(lam);
    if (lam == 0.0 || std::abs(pr.r[static_cast<std::size_t>(i)]) < rfloor) continue;
    const int mi = ts.grid.mirror(i);
    pr.S[static_cast<std::size_t>(i)] =
        sgn_n * pr.r[static_cast<std::size_t>(mi)] / pr.r[static_cast<std::size_t>(i)];
    try {
      const BkChain plus = bk_chain_from(resolvent_boundary(ts, i, Side::plus), alpha);
      const BkChain minus = bk_chain_from(resolvent_boundary(ts, i, Side::minus), alpha);
      for (int k = 0; k < n; ++k) {
        pr.bk_plus[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
            plus.bk[static_cast<std::size_t>(k)];
        pr.bk_minus[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
            minus.bk[static_cast<std::size_t>(k)];
        pr.Sk[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
            minus.bk[static_cast<std::size_t>(k)] / plus.bk[static_cast<std::size_t>(k)];
      }
    } catch (const Error&) {
      // channel pole at this node: leave the multipliers unset
    }
  }
  return pr;
}

}  // namespace scatter
