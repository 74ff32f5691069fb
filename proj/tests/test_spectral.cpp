#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <scatter/numeric.hpp>
#include <scatter/spectral_zeros.hpp>

#include "oracles.hpp"

using namespace scatter;

namespace {

SeparablePotential exp_pot(double alpha, double a = 1.0) {
  SeparablePotential p;
  p.terms.push_back({alpha, HalfLineFunction::exp_decay(a)});
  return p;
}

TransformSet standard_ts(const SeparablePotential& pot, double L = 50.0, int half = 1200) {
  return build_transforms(pot, SpectralGrid::uniform(L, half));
}

}  // namespace

TEST_CASE("kernel matrix: closed value, decay, channel diagonality") {
  const auto pot = exp_pot(-4.0);
  const auto ts = standard_ts(pot);
  // int |W|^2/(t^2+1) dt = pi/2 for the unit exponential
  CHECK(std::abs(boundstate_kernel_M(ts, 1.0)(0, 0).real() - 0.5 * oracle::pi) < 1e-7);
  // vanishes for large kappa
  CHECK(std::abs(boundstate_kernel_M(ts, 500.0)(0, 0)) < 1e-4);

  SeparablePotential bumps;
  bumps.terms.push_back({-8.0, HalfLineFunction::band_bump(0.5, 1.0)});
  bumps.terms.push_back({-15.0, HalfLineFunction::band_bump(1.5, 2.0)});
  const auto ts2 = standard_ts(bumps);
  const Eigen::MatrixXcd M = boundstate_kernel_M(ts2, 1.0);
  CHECK(std::abs(M(0, 1)) < 1e-10);
  CHECK(std::abs(M(1, 0)) < 1e-10);
  CHECK(M(0, 0).real() > 0.0);
}

TEST_CASE("bound states of the rank-one exponential channel") {
  // alpha = -4: exactly one state at kappa = 1
  {
    const auto pot = exp_pot(-4.0);
    const auto ts = standard_ts(pot);
    const auto bs = find_bound_states(pot, ts);
    REQUIRE(bs.size() == 1);
    CHECK(std::abs(bs[0].kappa - 1.0) <= 1e-4);
    CHECK(bs[0].energy == doctest::Approx(-bs[0].kappa * bs[0].kappa));
    CHECK(bs[0].residual <= 1e-6);
    CHECK(bs[0].multiplicity == 1);
    // trace law at the detected state; a shifted kappa breaks it
    CHECK(verify_boundstate_tracelaw(bs[0], ts, -4.0) <= 1e-4);
    BoundState wrong = bs[0];
    wrong.kappa = 1.1;
    CHECK(verify_boundstate_tracelaw(wrong, ts, -4.0) > 1e-2);
  }
  // positive coupling: none
  {
    const auto pot = exp_pot(0.7);
    const auto ts = standard_ts(pot);
    CHECK(find_bound_states(pot, ts).empty());
  }
  // weakly negative coupling: still none
  {
    const auto pot = exp_pot(-0.5);
    const auto ts = standard_ts(pot);
    CHECK(find_bound_states(pot, ts).empty());
  }
}

TEST_CASE("tracelaw guards its domain") {
  SeparablePotential two;
  two.terms.push_back({-4.0, HalfLineFunction::exp_decay(1.0)});
  two.terms.push_back({1.0, HalfLineFunction::exp_decay(2.0)});
  const auto ts = standard_ts(two);
  BoundState bs;
  bs.kappa = 1.0;
  CHECK_THROWS_AS(verify_boundstate_tracelaw(bs, ts, -4.0), Error);
}

TEST_CASE("scan boundary raises a range error") {
  const auto pot = exp_pot(-4.0);
  const auto ts = standard_ts(pot);
  BoundStateScan scan;
  scan.kappa_max = 0.5;  // the state at kappa = 1 lies beyond
  CHECK_THROWS_AS(find_bound_states(pot, ts, scan), Error);
}

TEST_CASE("bound-state count never exceeds the negative-coupling count") {
  std::mt19937 rng(271828u);
  std::uniform_real_distribution<double> ua(0.4, 2.5), uc(0.4, 4.0), u01(0.0, 1.0);
  const HalfLineFunction catalog[5] = {
      HalfLineFunction::exp_decay(1.0), HalfLineFunction::exp_decay(0.6),
      HalfLineFunction::band_bump(0.5, 1.0), HalfLineFunction::band_bump(1.5, 2.0),
      HalfLineFunction::band_bump(2.3, 3.0)};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(u01(rng) * 3.0) % 3;
    std::vector<int> pick{0, 1, 2, 3, 4};
    std::shuffle(pick.begin(), pick.end(), rng);
    SeparablePotential pot;
    for (int k = 0; k < n; ++k) {
      double alpha = uc(rng) * (u01(rng) < 0.5 ? -1.0 : 1.0);
      HalfLineFunction v = catalog[pick[static_cast<std::size_t>(k)]];
      if (v.kind() == FunctionKind::exp_decay) v = HalfLineFunction::exp_decay(ua(rng));
      pot.terms.push_back({alpha, v});
    }
    const auto ts = build_transforms(pot, SpectralGrid::uniform(50.0, 800));
    const auto bs = find_bound_states(pot, ts);
    int count = 0;
    for (const auto& b : bs) count += b.multiplicity;
    CHECK(count <= pot.negative_count());
  }
}

TEST_CASE("real zeros: exponential channels are clean, a manufactured zero is found") {
  for (double alpha : {0.7, -4.0}) {
    const auto pot = exp_pot(alpha);
    const auto ts = build_transforms(pot, SpectralGrid::uniform(30.0, 600));
    const auto pr = scattering_profile(pot, ts);
    const auto zs = find_real_zeros(pr, ts);
    CHECK(zs.zeros.empty());
    CHECK(zs.includes_origin);
  }

  // band kernel with the coupling tuned so that B+ vanishes at lambda0 = 3
  const auto b = HalfLineFunction::band_bump(1.0, 2.0);
  const cd I = oracle::integrate(
      [&](double t) {
        const double s = b.sine_transform(t).real();
        return oracle::cd(2.0 / oracle::pi * s * s / (t * t - 9.0));
      },
      0.95, 2.05, 1e-13);
  const double alpha = -1.0 / I.real();
  REQUIRE(alpha > 0.0);
  SeparablePotential pot;
  pot.terms.push_back({alpha, b});
  const auto ts = build_transforms(pot, SpectralGrid::uniform(30.0, 600));
  const auto pr = scattering_profile(pot, ts);
  REQUIRE(pr.real_zeros.size() == 1);
  const auto zs = find_real_zeros(pr, ts);
  REQUIRE(zs.zeros.size() == 1);
  CHECK(std::abs(zs.zeros[0] - 3.0) <= 1e-6);
  CHECK(zs.multiplicity[0] == 1);
}

TEST_CASE("bound-state eigenfunction of the exponential channel") {
  const auto pot = exp_pot(-4.0);
  const auto ts = standard_ts(pot);
  const auto bs = find_bound_states(pot, ts);
  REQUIRE(bs.size() == 1);

  std::vector<double> xg(3501);
  for (std::size_t j = 0; j < xg.size(); ++j) xg[j] = 35.0 * j / (xg.size() - 1);
  const auto e = boundstate_eigenfunction(bs[0], pot, ts, xg);

  // closed-form eigenfunction x e^{-x}, unit-normalized: 2 x e^{-x}
  double sign = (e[100].real() >= 0.0) ? 1.0 : -1.0;
  double maxdiff = 0.0, maxabs = 0.0;
  for (std::size_t j = 0; j < xg.size(); ++j) {
    maxdiff = std::max(maxdiff,
                       std::abs(sign * e[j] - cd(2.0 * xg[j] * std::exp(-xg[j]))));
    maxabs = std::max(maxabs, std::abs(e[j]));
  }
  CHECK(maxdiff < 1e-4);
  // Dirichlet end and decay
  CHECK(std::abs(e.front()) <= 1e-4 * maxabs);
  CHECK(std::abs(e.back()) < 1e-10);

  // unit norm including the exponential tail
  const auto w = sample_quad_weights(xg);
  double nrm2 = 0.0;
  for (std::size_t j = 0; j < xg.size(); ++j) nrm2 += w[j] * std::norm(e[j]);
  CHECK(std::sqrt(nrm2) == doctest::Approx(1.0).epsilon(1e-6));

  // Rayleigh quotient: [int |e'|^2 + alpha |<e,v>|^2] / int |e|^2 = -kappa^2
  const double h = xg[1] - xg[0];
  double kin = 0.0;
  for (std::size_t j = 1; j + 1 < xg.size(); ++j) {
    const cd d = (e[j + 1] - e[j - 1]) / (2.0 * h);
    kin += w[j] * std::norm(d);
  }
  // one-sided endpoint derivatives close the quadrature
  const cd d0 = (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h);
  const cd dn = (3.0 * e[e.size() - 1] - 4.0 * e[e.size() - 2] + e[e.size() - 3]) / (2.0 * h);
  kin += w[0] * std::norm(d0) + w[e.size() - 1] * std::norm(dn);
  cd proj = 0.0;
  for (std::size_t j = 0; j < xg.size(); ++j)
    proj += w[j] * e[j] * std::conj(pot.v(0).eval(xg[j]));
  const double energy = kin + pot.alpha(0) * std::norm(proj);
  CHECK(std::abs(energy / nrm2 - (-1.0)) < 1e-3);

  // a fake kappa fails the decay screen
  BoundState fake = bs[0];
  fake.kappa = 0.02;
  CHECK_THROWS_AS(boundstate_eigenfunction(fake, pot, ts, xg), Error);
}

TEST_CASE("kernel vectors of distinct states stay orthogonal") {
  SeparablePotential pot;
  pot.terms.push_back({-8.0, HalfLineFunction::band_bump(0.5, 1.0)});
  pot.terms.push_back({-15.0, HalfLineFunction::band_bump(1.5, 2.0)});
  const auto ts = standard_ts(pot);
  const auto bs = find_bound_states(pot, ts);
  REQUIRE(bs.size() == 2);
  CHECK(std::abs(bs[0].kappa - bs[1].kappa) > 1e-3);
  int total = 0;
  for (const auto& b : bs) total += b.multiplicity;
  CHECK(total <= pot.negative_count());

  // int conj(F_q) F_p / ((t^2+kq^2)(t^2+kp^2)) dt with F_p = sum_k W_k f_p(k)
  const int i0 = ts.grid.zero_index();
  const std::vector<double> ht(ts.grid.points().begin() + i0, ts.grid.points().end());
  const auto hw = sample_quad_weights(ht);
  cd acc = 0.0;
  for (std::size_t j = 0; j < ht.size(); ++j) {
    cd Fp = 0.0, Fq = 0.0;
    for (int k = 0; k < 2; ++k) {
      Fp += ts.W_at(k, i0 + static_cast<int>(j)) * bs[0].fvec(k);
      Fq += ts.W_at(k, i0 + static_cast<int>(j)) * bs[1].fvec(k);
    }
    const double t = ht[j];
    acc += hw[j] * std::conj(Fq) * Fp /
           ((t * t + bs[1].kappa * bs[1].kappa) * (t * t + bs[0].kappa * bs[0].kappa));
  }
  CHECK(std::abs(acc) <= 1e-6);
}
