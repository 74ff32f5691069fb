#include "scatter/spectral_zeros.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "scatter/cauchy.hpp"
#include "scatter/numeric.hpp"

namespace scatter {

namespace {

// trailing power fit of a real sequence, c0 + c1/t^2 against t^{-p}
struct Fit2 {
  double c0 = 0.0, c1 = 0.0;
};

Fit2 fit2(std::span<const double> t, std::span<const double> y, double p) {
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double f1 = std::pow(t[j], -p);
    const double f2 = f1 / (t[j] * t[j]);
    s11 += f1 * f1;
    s12 += f1 * f2;
    s22 += f2 * f2;
    b1 += f1 * y[j];
    b2 += f2 * y[j];
  }
  const double det = s11 * s22 - s12 * s12;
  Fit2 out;
  if (std::abs(det) > 1e-300) {
    out.c0 = (s22 * b1 - s12 * b2) / det;
    out.c1 = (s11 * b2 - s12 * b1) / det;
  }
  return out;
}

// int_0^inf conj(W_s) W_k K(t) dt from half-grid samples with a fitted tail
cd w_product_integral(const TransformSet& ts, int s, int k,
                      const std::function<double(double)>& kernel) {
  const int i0 = ts.grid.zero_index();
  const int nh = ts.grid.half_size();
  const std::vector<double> ht(ts.grid.points().begin() + i0, ts.grid.points().end());
  const std::vector<double> hw = sample_quad_weights(ht);
  std::vector<cd> terms(static_cast<std::size_t>(nh));
  for (int j = 0; j < nh; ++j) {
    const cd prod = std::conj(ts.W_at(s, i0 + j)) * ts.W_at(k, i0 + j);
    terms[static_cast<std::size_t>(j)] = hw[static_cast<std::size_t>(j)] * prod * kernel(ht[static_cast<std::size_t>(j)]);
  }
  cd head = pairwise_sum(std::span<const cd>(terms));

  // 2-term tail of the product (p = 2)
  const int m = std::max(6, nh / 20);
  std::vector<double> tt(ht.end() - m, ht.end());
  std::vector<double> yr(static_cast<std::size_t>(m)), yi(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const cd prod = std::conj(ts.W_at(s, i0 + nh - m + j)) * ts.W_at(k, i0 + nh - m + j);
    yr[static_cast<std::size_t>(j)] = prod.real();
    yi[static_cast<std::size_t>(j)] = prod.imag();
  }
  const Fit2 fr = fit2(tt, yr, 2.0);
  const Fit2 fi = fit2(tt, yi, 2.0);
  const double L = ts.grid.lambda_max();
  auto g = [&](double u) -> cd {
    const double t = L * std::exp(u);
    const cd model(fr.c0 / (t * t) + fr.c1 / (t * t * t * t),
                   fi.c0 / (t * t) + fi.c1 / (t * t * t * t));
    return model * kernel(t) * t;
  };
  head += integrate_gl(g, 0.0, std::log(1e8), 24, 12);
  return head;
}

Eigen::MatrixXcd hermitianize(Eigen::MatrixXcd A) { return 0.5 * (A + A.adjoint()); }

Eigen::VectorXd sorted_eigs(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  return es.eigenvalues();
}

}  // namespace

Eigen::MatrixXcd boundstate_kernel_M(const TransformSet& ts, double kappa) {
  if (!(kappa > 0.0)) throw Error(Errc::domain, "boundstate_kernel_M: kappa must be > 0");
  const int n = ts.n();
  Eigen::MatrixXcd M(n, n);
  auto kernel = [kappa](double t) { return 1.0 / (t * t + kappa * kappa); };
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k) M(s, k) = w_product_integral(ts, s, k, kernel);
  return hermitianize(M);
}

std::vector<BoundState> find_bound_states(const SeparablePotential& pot,
                                          const TransformSet& ts,
                                          const BoundStateScan& scan) {
  std::vector<BoundState> out;
  if (pot.negative_count() == 0) return out;
  const int n = pot.n();

  Eigen::MatrixXcd inv_alpha = Eigen::MatrixXcd::Zero(n, n);
  double max_abs_alpha = 0.0;
  for (int k = 0; k < n; ++k) {
    inv_alpha(k, k) = 1.0 / pot.alpha(k);
    max_abs_alpha = std::max(max_abs_alpha, std::abs(pot.alpha(k)));
  }
  auto H = [&](double kappa) -> Eigen::MatrixXcd {
    return hermitianize(boundstate_kernel_M(ts, kappa) + 2.0 * pi * inv_alpha);
  };

  double kappa_max = scan.kappa_max;
  if (kappa_max <= 0.0) {
    // ||M(kappa)|| <= D / kappa^2 with D = int ||W+W||; no roots beyond
    const cd D = w_product_integral(ts, 0, 0, [](double) { return 1.0; });
    double Dn = std::abs(D);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k)
        if (s || k)
          Dn = std::max(Dn, std::abs(w_product_integral(ts, s, k, [](double) { return 1.0; })));
    Dn *= n;
    kappa_max = 1.2 * std::sqrt(Dn * max_abs_alpha / (2.0 * pi)) + 1.0;
  }

  // geometric scan of the sorted eigenvalue branches
  const int P = std::max(32, scan.panels);
  std::vector<double> kgrid(static_cast<std::size_t>(P + 1));
  for (int j = 0; j <= P; ++j)
    kgrid[static_cast<std::size_t>(j)] =
        scan.kappa_min * std::pow(kappa_max / scan.kappa_min, static_cast<double>(j) / P);
  std::vector<Eigen::VectorXd> evs(kgrid.size());
  for (std::size_t j = 0; j < kgrid.size(); ++j) evs[j] = sorted_eigs(H(kgrid[j]));

  const Eigen::VectorXd asym = sorted_eigs(2.0 * pi * inv_alpha);
  for (int br = 0; br < n; ++br) {
    if (asym(br) < 0.0 && evs.back()(br) > 0.0)
      throw Error(Errc::range,
                  "find_bound_states: eigenvalue branch still positive at kappa_max; "
                  "increase the scan range");
  }

  for (int br = 0; br < n; ++br) {
    for (std::size_t j = 0; j + 1 < kgrid.size(); ++j) {
      if (!(evs[j](br) > 0.0 && evs[j + 1](br) <= 0.0)) continue;
      double lo = kgrid[j], hi = kgrid[j + 1];
      for (int it = 0; it < 80 && (hi - lo) > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sorted_eigs(H(mid))(br) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      const double kappa = 0.5 * (lo + hi);
      bool dup = false;
      for (const auto& bs : out) dup = dup || std::abs(bs.kappa - kappa) < 1e-7 * (1.0 + kappa);
      if (dup) continue;

      const Eigen::MatrixXcd Hk = H(kappa);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hk);
      int mult = 0;
      double scale = Hk.norm() + 1.0;
      for (int q = 0; q < n; ++q)
        if (std::abs(es.eigenvalues()(q)) < 1e-6 * scale) ++mult;
      mult = std::max(mult, 1);
      // eigenvector of the smallest |eigenvalue|
      int qmin = 0;
      for (int q = 1; q < n; ++q)
        if (std::abs(es.eigenvalues()(q)) < std::abs(es.eigenvalues()(qmin))) qmin = q;
      BoundState bs;
      bs.kappa = kappa;
      bs.energy = -kappa * kappa;
      bs.fvec = es.eigenvectors().col(qmin);
      bs.fvec /= bs.fvec.norm();
      bs.residual = (Hk * bs.fvec).norm();
      bs.multiplicity = mult;
      out.push_back(std::move(bs));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const BoundState& a, const BoundState& b) { return a.kappa < b.kappa; });
  return out;
}

double verify_boundstate_tracelaw(const BoundState& bs, const TransformSet& ts,
                                  double alpha) {
  if (ts.n() != 1)
    throw Error(Errc::domain, "verify_boundstate_tracelaw: defined for rank-one only");
  const double kappa = bs.kappa;
  const cd lhs = w_product_integral(
      ts, 0, 0, [kappa](double t) { return 1.0 / (t * t + kappa * kappa); });
  return std::abs(lhs.real() + 2.0 * pi / alpha);
}

RealZeroSet find_real_zeros(const ScatteringProfile& profile, const TransformSet& ts) {
  RealZeroSet out;
  const int n = ts.n();
  Eigen::MatrixXcd inv_alpha = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) inv_alpha(k, k) = 1.0 / ts.pot.alpha(k);

  bool real_pot = true;
  for (int k = 0; k < n; ++k) real_pot = real_pot && ts.pot.v(k).is_real();

  for (double lam0 : profile.real_zeros) {
    // kernel conditions: W(lam0) f = 0 and the PV matrix annihilates f
    Eigen::MatrixXcd N(n, n);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k) {
        if (real_pot) {
          // conj(W_s) W_k = 4 shat_s shat_k on the positive axis
          N(s, k) = 4.0 * pv_sine_product(ts.pot.v(s), ts.pot.v(k), lam0);
        } else {
          // sampled route: the full-line PV of the even product equals the
          // folded form times 2 lam0
          std::vector<cd> prod(static_cast<std::size_t>(ts.grid.size()));
          for (int i = 0; i < ts.grid.size(); ++i)
            prod[static_cast<std::size_t>(i)] = std::conj(ts.W_at(s, i)) * ts.W_at(k, i);
          DensitySamples d(ts.grid, std::move(prod), 2.0, Parity::even);
          N(s, k) = pv_integral(d, lam0) / (2.0 * lam0);
        }
      }
    N += 2.0 * pi * inv_alpha;

    // the natural scale of the condition matrix, independent of how close N
    // is to singular at the candidate
    double nscale = 0.0;
    for (int k = 0; k < n; ++k) nscale = std::max(nscale, 2.0 * pi / std::abs(ts.pot.alpha(k)));

    Eigen::MatrixXcd stacked(n + 1, n);
    for (int k = 0; k < n; ++k)
      stacked(0, k) = -2.0 * iu * ts.pot.v(k).sine_transform(lam0);
    stacked.bottomRows(n) = N / nscale;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeFullV);
    const Eigen::VectorXcd f = svd.matrixV().col(n - 1);
    double wres = 0.0;
    for (int k = 0; k < n; ++k)
      wres += std::abs((-2.0 * iu * ts.pot.v(k).sine_transform(lam0)) * f(k));
    const double nres = (N * f).norm() / nscale;

    if (wres <= 1e-4 && nres <= 1e-4) {
      out.zeros.push_back(lam0);
      // multiplicity from the near-null singular values of N
      Eigen::JacobiSVD<Eigen::MatrixXcd> nsvd(N);
      int mult = 0;
      for (int q = 0; q < n; ++q)
        if (nsvd.singularValues()(q) < 1e-6 * nscale) ++mult;
      out.multiplicity.push_back(std::max(1, mult));
    } else {
      out.near_zeros.push_back(lam0);
    }
  }
  out.includes_origin = true;
  return out;
}

// The grid transforms carry boundary data only; everything here is
// re-evaluated at the imaginary point, so the TransformSet goes unused.
std::vector<cd> boundstate_eigenfunction(const BoundState& bs,
                                         const SeparablePotential& pot,
                                         const TransformSet& /*ts*/,
                                         const std::vector<double>& xgrid) {
  const int n = pot.n();
  const double kappa = bs.kappa;
  if (!(kappa > 0.0)) throw Error(Errc::domain, "boundstate_eigenfunction: kappa <= 0");

  // lambda = i kappa data
  const cd mu(0.0, -kappa);  // lower half-plane argument for the transforms
  Eigen::MatrixXcd A(n, n);
  Eigen::VectorXcd vstar(n);
  for (int j = 0; j < n; ++j) {
    vstar(j) = std::conj(pot.v(j).vtilde(mu));
    for (int k = 0; k < n; ++k) {
      A(j, k) = std::conj(Phi_point(pot.v(k), pot.v(j), mu)) +
                Phi_point(pot.v(j), pot.v(k), mu);
      if (j == k) A(j, k) += 2.0 * kappa / pot.alpha(j);
    }
  }
  cd C = 1.0;
  for (int k = 0; k < n; ++k) C *= pot.alpha(k) / (-2.0 * kappa);
  const cd detA = A.determinant();

  std::vector<Eigen::MatrixXcd> Aj(static_cast<std::size_t>(n), A);
  std::vector<cd> detAj(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Aj[static_cast<std::size_t>(k)].col(k) = vstar;
    detAj[static_cast<std::size_t>(k)] = Aj[static_cast<std::size_t>(k)].determinant();
  }

  std::vector<cd> e(xgrid.size());
  parallel_for(xgrid.size(), [&](std::size_t jx) {
    const double x = xgrid[jx];
    cd val = std::exp(-kappa * x) * detA;
    for (int k = 0; k < n; ++k) {
      // w_k(i kappa, x) = int e^{-kappa |t-x|} v_k(t) dt
      const HalfLineFunction& vk = pot.v(k);
      const double X = x + 50.0 / kappa;
      auto f = [&](double t) -> cd {
        return std::exp(-kappa * std::abs(t - x)) * vk.eval(t);
      };
      const cd w = adaptive_integrate(f, 0.0, x, 1e-11) +
                   adaptive_integrate(f, x, X, 1e-11);
      val -= w * detAj[static_cast<std::size_t>(k)];
    }
    e[jx] = C * val;
  });

  // Dirichlet end and tail decay screen genuine states from stray kappa
  double m34 = 0.0, mend = 0.0, mall = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    mall = std::max(mall, std::abs(e[j]));
    if (j >= e.size() * 3 / 4) mend = std::max(mend, std::abs(e[j]));
    if (j >= e.size() / 2 && j < e.size() * 3 / 4) m34 = std::max(m34, std::abs(e[j]));
  }
  if (mend > m34 && mend > 1e-8 * mall)
    throw Error(Errc::inconsistent_data,
                "boundstate_eigenfunction: tail does not decay; kappa is not a bound state");
  if (std::abs(e.front()) > 1e-3 * mall)
    throw Error(Errc::inconsistent_data,
                "boundstate_eigenfunction: boundary value does not vanish; "
                "kappa is not a bound state");

  // normalize to unit L2 norm (sample quadrature + exponential tail)
  const std::vector<double> w = sample_quad_weights(xgrid);
  std::vector<double> terms(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) terms[j] = w[j] * std::norm(e[j]);
  double nrm2 = pairwise_sum(std::span<const double>(terms));
  nrm2 += std::norm(e.back()) / (2.0 * kappa);
  const double nrm = std::sqrt(nrm2);
  if (nrm > 0.0)
    for (cd& z : e) z /= nrm;
  return e;
}

}  // namespace scatter
