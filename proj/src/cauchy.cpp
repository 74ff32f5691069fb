#include "scatter/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "scatter/numeric.hpp"

namespace scatter {

namespace {

std::string format_dump(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// least-squares fit rho(t) ~ (c0 + c1/t^2) t^{-p} on trailing samples
struct TailFit {
  cd c0{0.0}, c1{0.0};
};

TailFit fit_tail(std::span<const double> t, std::span<const cd> rho, double p) {
  double s11 = 0, s12 = 0, s22 = 0;
  cd b1 = 0, b2 = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double ta = std::abs(t[j]);
    const double f1 = std::pow(ta, -p);
    const double f2 = f1 / (ta * ta);
    s11 += f1 * f1;
    s12 += f1 * f2;
    s22 += f2 * f2;
    b1 += f1 * rho[j];
    b2 += f2 * rho[j];
  }
  const double det = s11 * s22 - s12 * s12;
  TailFit out;
  if (std::abs(det) > 1e-300) {
    out.c0 = (s22 * b1 - s12 * b2) / det;
    out.c1 = (s11 * b2 - s12 * b1) / det;
  }
  return out;
}

// int_L^inf (c0 t^{-p} + c1 t^{-p-2}) K(t) dt via log substitution
template <class K>
cd tail_integral(const TailFit& f, double p, double L, K kernel) {
  auto g = [&](double u) -> cd {
    const double t = L * std::exp(u);
    return (f.c0 * std::pow(t, -p) + f.c1 * std::pow(t, -p - 2.0)) * kernel(t) * t;
  };
  const double U = std::log(1e8);
  return integrate_gl(g, 0.0, U, 24, 12);
}

std::vector<double> half_points(const SpectralGrid& g) {
  return std::vector<double>(g.points().begin() + g.zero_index(), g.points().end());
}

}  // namespace

DensitySamples::DensitySamples(SpectralGrid g, std::vector<cd> v, double p, Parity par)
    : grid(std::move(g)), values(std::move(v)), tail_exponent(p), parity(par) {
  if (static_cast<int>(values.size()) != grid.size())
    throw Error(Errc::data, "density: sample count does not match the grid");
  for (const cd& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(Errc::data, "density: non-finite sample");
  if (parity == Parity::none && !(tail_exponent > 1.0))
    throw Error(Errc::data, "density: tail exponent must exceed 1");
  if (parity != Parity::none && !(tail_exponent > 0.0))
    throw Error(Errc::data, "density: tail exponent must be positive");
}

cd DensitySamples::interp(double t) const {
  const auto& pts = grid.points();
  const int n = grid.size();
  if (t < pts.front() || t > pts.back())
    throw Error(Errc::domain, "density: interpolation outside the span");
  int j = static_cast<int>(std::upper_bound(pts.begin(), pts.end(), t) - pts.begin()) - 1;
  j = std::clamp(j, 1, n - 3);
  // 4-point Lagrange on nodes j-1..j+2
  cd out = 0.0;
  for (int m = j - 1; m <= j + 2; ++m) {
    double L = 1.0;
    for (int q = j - 1; q <= j + 2; ++q)
      if (q != m) L *= (t - pts[static_cast<std::size_t>(q)]) /
                       (pts[static_cast<std::size_t>(m)] - pts[static_cast<std::size_t>(q)]);
    out += L * values[static_cast<std::size_t>(m)];
  }
  return out;
}

cd pv_integral(const DensitySamples& rho, double lambda) {
  const auto& pts = rho.grid.points();
  const int n = rho.grid.size();
  const double L = rho.grid.lambda_max();
  if (!(lambda > pts[1] && lambda < pts[static_cast<std::size_t>(n - 2)]))
    throw Error(Errc::domain, "pv_integral: lambda too close to the grid boundary");

  const double p = rho.tail_exponent;
  const int i0 = rho.grid.zero_index();
  const int nh = rho.grid.half_size();
  const int m = std::max(6, nh / 20);

  if (rho.parity != Parity::none) {
    // folded kernels: even -> 2 lam/(t^2-lam^2), odd -> 2 t/(t^2-lam^2)
    const double t0 = std::abs(lambda);
    const std::vector<double> ht = half_points(rho.grid);
    const std::vector<double> hw = sample_quad_weights(ht);
    const bool even = rho.parity == Parity::even;
    TailFit tf = fit_tail(std::span<const double>(ht).last(static_cast<std::size_t>(m)),
                          std::span<const cd>(rho.values).last(static_cast<std::size_t>(m)), p);

    if (t0 < 1e-300) {
      if (even) return 0.0;  // odd integrand
      // odd density at lambda = 0: kernel 2/t, regular since rho(0) = 0
      std::vector<cd> terms(ht.size());
      terms[0] = 0.0;
      if (ht.size() > 1) {
        const cd slope = rho.at(i0 + 1) / ht[1];
        terms[0] = hw[0] * 2.0 * slope;
        for (std::size_t j = 1; j < ht.size(); ++j)
          terms[j] = hw[j] * 2.0 * rho.at(i0 + static_cast<int>(j)) / ht[j];
      }
      return pairwise_sum(std::span<const cd>(terms)) +
             tail_integral(tf, p, L, [&](double t) { return 2.0 / t; });
    }

    const cd r0 = rho.interp(t0);
    const double eps = 1e-6 * std::max(1.0, L);
    const cd dr0 = (rho.interp(std::min(t0 + eps, ht.back())) -
                    rho.interp(std::max(t0 - eps, 0.0))) /
                   (std::min(t0 + eps, ht.back()) - std::max(t0 - eps, 0.0));

    std::vector<cd> terms(ht.size());
    for (std::size_t j = 0; j < ht.size(); ++j) {
      const double t = ht[j];
      const cd rj = rho.at(i0 + static_cast<int>(j));
      cd val;
      if (std::abs(t - t0) < 1e-11 * std::max(1.0, t0)) {
        // limit of (rho - r0) * kernel at the pole
        val = even ? dr0 * (lambda / t0) : dr0;
      } else {
        const double ker = even ? 2.0 * lambda : 2.0 * t;
        val = (rj - r0) * ker / (t * t - t0 * t0);
      }
      terms[j] = hw[j] * val;
    }
    cd head = pairwise_sum(std::span<const cd>(terms));

    // exact PV of the kernel against the constant r0 over [0, L]
    const cd logterm = even
                           ? r0 * (lambda / t0) * std::log((L - t0) / (L + t0))
                           : r0 * std::log((L * L - t0 * t0) / (t0 * t0));
    cd tail = even ? tail_integral(tf, p, L,
                                   [&](double t) { return 2.0 * lambda / (t * t - t0 * t0); })
                   : tail_integral(tf, p, L,
                                   [&](double t) { return 2.0 * t / (t * t - t0 * t0); });
    return head + logterm + tail;
  }

  // unfolded path
  const auto& w = rho.grid.quad_weights();
  const cd r0 = rho.interp(lambda);
  std::vector<cd> terms(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double d = pts[static_cast<std::size_t>(j)] - lambda;
    cd val;
    if (std::abs(d) < 1e-11 * std::max(1.0, std::abs(lambda))) {
      const double eps = 1e-6 * std::max(1.0, L);
      val = (rho.interp(std::min(lambda + eps, pts.back())) -
             rho.interp(std::max(lambda - eps, pts.front()))) /
            (std::min(lambda + eps, pts.back()) - std::max(lambda - eps, pts.front()));
    } else {
      val = (rho.at(j) - r0) / d;
    }
    terms[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] * val;
  }
  cd out = pairwise_sum(std::span<const cd>(terms));
  out += r0 * std::log((L - lambda) / (L + lambda));

  TailFit right = fit_tail(
      std::span<const double>(pts).last(static_cast<std::size_t>(m)),
      std::span<const cd>(rho.values).last(static_cast<std::size_t>(m)), p);
  std::vector<double> lt(pts.begin(), pts.begin() + m);
  std::vector<cd> lv(rho.values.begin(), rho.values.begin() + m);
  std::reverse(lt.begin(), lt.end());
  std::reverse(lv.begin(), lv.end());
  TailFit left = fit_tail(lt, lv, p);
  out += tail_integral(right, p, L, [&](double t) { return 1.0 / (t - lambda); });
  out += tail_integral(left, p, L, [&](double t) { return -1.0 / (t + lambda); });
  return out;
}

SokhotskiPair sokhotski_pair(const DensitySamples& rho, double lambda) {
  const cd pv = pv_integral(rho, lambda);
  const cd r0 = rho.interp(lambda);
  const cd cauchy = pv / (2.0 * pi * iu);
  return SokhotskiPair{0.5 * r0 + cauchy, -0.5 * r0 + cauchy};
}

cd cauchy_offaxis(const DensitySamples& rho, cd z) {
  if (z.imag() == 0.0) throw Error(Errc::domain, "cauchy_offaxis: need Im z != 0");
  const auto& pts = rho.grid.points();
  const int n = rho.grid.size();
  const double L = rho.grid.lambda_max();
  const double h = rho.grid.spacing();
  const double p = rho.tail_exponent;
  const int m = std::max(6, rho.grid.half_size() / 20);

  cd head;
  const bool near_axis =
      std::abs(z.imag()) < 4.0 * h && std::abs(z.real()) < L - 4.0 * h;
  if (!near_axis) {
    const auto& w = rho.grid.quad_weights();
    std::vector<cd> terms(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      terms[static_cast<std::size_t>(j)] =
          w[static_cast<std::size_t>(j)] * rho.at(j) / (pts[static_cast<std::size_t>(j)] - z);
    head = pairwise_sum(std::span<const cd>(terms));
  } else {
    // exact Cauchy transform of the piecewise-cubic interpolant: immune to
    // the 1/Im(z) quadrature blowup
    std::vector<cd> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j + 1 < n; ++j) {
      const double a = pts[static_cast<std::size_t>(j)];
      const double b = pts[static_cast<std::size_t>(j + 1)];
      const int jc = std::clamp(j, 1, n - 3);
      // cubic through nodes jc-1..jc+2 in the shifted variable u = t - a
      double tu[4];
      cd tv[4];
      for (int q = 0; q < 4; ++q) {
        tu[q] = pts[static_cast<std::size_t>(jc - 1 + q)] - a;
        tv[q] = rho.at(jc - 1 + q);
      }
      // divided-difference Newton form -> power coefficients
      cd dd[4] = {tv[0], tv[1], tv[2], tv[3]};
      for (int lev = 1; lev < 4; ++lev)
        for (int q = 3; q >= lev; --q)
          dd[q] = (dd[q] - dd[q - 1]) / (tu[q] - tu[q - lev]);
      cd c[4] = {0.0, 0.0, 0.0, 0.0};
      cd basis[4] = {1.0, 0.0, 0.0, 0.0};
      int deg = 0;
      for (int lev = 0; lev < 4; ++lev) {
        for (int q = 0; q <= deg; ++q) c[q] += dd[lev] * basis[q];
        if (lev < 3) {
          for (int q = deg + 1; q >= 1; --q)
            basis[q] = basis[q - 1] - tu[lev] * basis[q];
          basis[0] = -tu[lev] * basis[0];
          ++deg;
        }
      }
      // moments M_m = int_0^hseg u^m/(u - zeta) du, zeta = z - a
      const double hseg = b - a;
      const cd zeta = z - a;
      cd M[4];
      M[0] = std::log((hseg - zeta) / (-zeta));
      double hp = 1.0;
      for (int q = 1; q < 4; ++q) {
        hp *= hseg;
        M[q] = hp / q + zeta * M[q - 1];
      }
      terms.push_back(c[0] * M[0] + c[1] * M[1] + c[2] * M[2] + c[3] * M[3]);
    }
    head = pairwise_sum(std::span<const cd>(terms));
  }

  TailFit right = fit_tail(
      std::span<const double>(pts).last(static_cast<std::size_t>(m)),
      std::span<const cd>(rho.values).last(static_cast<std::size_t>(m)), p);
  std::vector<double> lt(pts.begin(), pts.begin() + m);
  std::vector<cd> lv(rho.values.begin(), rho.values.begin() + m);
  std::reverse(lt.begin(), lt.end());
  std::reverse(lv.begin(), lv.end());
  TailFit left = fit_tail(lt, lv, p);
  head += tail_integral(right, p, L, [&](double t) { return 1.0 / (t - z); });
  head += tail_integral(left, p, L, [&](double t) { return -1.0 / (t + z); });
  return head / (2.0 * pi * iu);
}

void pv_debug_dump(const DensitySamples& rho, double lambda, std::ostream& out) {
  const auto& pts = rho.grid.points();
  const cd r0 = rho.interp(lambda);
  out << "t,re,im\n";
  for (int j = 0; j < rho.grid.size(); ++j) {
    const double d = pts[static_cast<std::size_t>(j)] - lambda;
    const cd val = (std::abs(d) < 1e-12) ? cd(0.0) : (rho.at(j) - r0) / d;
    out << format_dump(pts[static_cast<std::size_t>(j)]) << ','
        << format_dump(val.real()) << ',' << format_dump(val.imag()) << "\n";
  }
}

MatrixSokhotskiPair matrix_sokhotski(const MatrixDensity& rho, double lambda) {
  if (rho.values.empty()) throw Error(Errc::data, "matrix_sokhotski: empty density");
  const int n = static_cast<int>(rho.values.front().rows());
  MatrixSokhotskiPair out;
  out.plus.resize(n, n);
  out.minus.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      std::vector<cd> comp(rho.values.size());
      for (std::size_t i = 0; i < rho.values.size(); ++i) comp[i] = rho.values[i](r, c);
      DensitySamples d(rho.grid, std::move(comp), rho.tail_exponent, rho.parity);
      const SokhotskiPair sp = sokhotski_pair(d, lambda);
      out.plus(r, c) = sp.plus;
      out.minus(r, c) = sp.minus;
    }
  return out;
}

}  // namespace scatter
