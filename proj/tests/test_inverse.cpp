#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <scatter/forward.hpp>
#include <scatter/inverse.hpp>
#include <scatter/numeric.hpp>
#include <scatter/spectral_zeros.hpp>

#include "oracles.hpp"

using namespace scatter;
using oracle::UnitExp;

namespace {

SeparablePotential exp_pot(double alpha) {
  SeparablePotential p;
  p.terms.push_back({alpha, HalfLineFunction::exp_decay(1.0)});
  return p;
}

struct ForwardData {
  SpectralGrid grid;
  TransformSet ts;
  ScatteringProfile profile;
  std::vector<double> kappas;
};

ForwardData forward(const SeparablePotential& pot, double L = 50.0, int half = 2000) {
  ForwardData fd;
  fd.grid = SpectralGrid::uniform(L, half);
  fd.ts = build_transforms(pot, fd.grid);
  fd.profile = scattering_profile(pot, fd.ts);
  for (const auto& bs : find_bound_states(pot, fd.ts)) fd.kappas.push_back(bs.kappa);
  return fd;
}

double rel_l2(const std::vector<double>& got, const std::vector<double>& want,
              const SpectralGrid& g, double window) {
  const auto& w = g.quad_weights();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double lam = g[i];
    if (lam < 0.0 || lam > window || g.flagged(lam)) continue;
    num += w[i] * (got[i] - want[i]) * (got[i] - want[i]);
    den += w[i] * want[i] * want[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("phase extraction: trivial, closed form, arctan cross-check") {
  const auto grid = SpectralGrid::uniform(50.0, 2000);

  // S identically 1 carries no phase
  std::vector<cd> ones(grid.size(), cd(1.0));
  const auto d0 = extract_zeta(grid, ones, PhaseInput::s_samples);
  for (double z : d0.zeta) CHECK(std::abs(z) < 1e-14);

  // alpha = 0.7: zeta = arg B+ (principal branch suffices, no zeros)
  const double alpha = 0.7;
  std::vector<cd> S(grid.size());
  for (int i = 0; i < grid.size(); ++i) S[i] = UnitExp::S(alpha, grid[i]);
  const auto data = extract_zeta(grid, S, PhaseInput::s_samples);
  double worst = 0.0, worst_atan = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double lam = grid[i];
    if (std::abs(lam) < 0.1) continue;
    const double want = std::arg(UnitExp::Bplus(alpha, lam));
    worst = std::max(worst, std::abs(data.zeta[i] - want));
    // arctan form: tan(zeta) = Im B+/Re B+
    const cd b = UnitExp::Bplus(alpha, lam);
    worst_atan = std::max(worst_atan,
                          std::abs(std::tan(data.zeta[i]) - b.imag() / b.real()));
  }
  CHECK(worst < 1e-10);
  CHECK(worst_atan < 1e-9);
  // oddness is exact after symmetrization
  for (int i = 0; i < grid.size(); ++i)
    CHECK(data.zeta[i] + data.zeta[grid.mirror(i)] == 0.0);

  // b_minus input gives the same phase
  std::vector<cd> bm(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    bm[i] = std::conj(UnitExp::Bplus(alpha, grid[i]));
  const auto d2 = extract_zeta(grid, bm, PhaseInput::b_minus);
  for (int i = 0; i < grid.size(); i += 101)
    CHECK(std::abs(d2.zeta[i] - data.zeta[i]) < 1e-10);
}

TEST_CASE("phase extraction winds through the bound-state offset") {
  const auto fd = forward(exp_pot(-4.0));
  const auto data =
      extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples, {}, fd.kappas);
  // continuous branch reaches -pi at 0+
  int i1 = fd.grid.zero_index() + 3;
  const double lam1 = fd.grid[i1];
  const double want = std::arg(UnitExp::Bplus(-4.0, lam1)) - 2.0 * oracle::pi *
      std::floor((std::arg(UnitExp::Bplus(-4.0, lam1)) + oracle::pi) / (2.0 * oracle::pi));
  CHECK(data.zeta[i1] == doctest::Approx(want).epsilon(1e-6));
  CHECK(data.zeta[i1] < -2.9);
}

TEST_CASE("phase extraction flags unresolvable winding") {
  const auto grid = SpectralGrid::uniform(10.0, 80);
  std::vector<cd> fast(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    fast[i] = std::exp(cd(0.0, 2.9 * grid[i] * grid[i]));  // > pi per step at the edge
  CHECK_THROWS_AS(extract_zeta(grid, fast, PhaseInput::s_samples), Error);
}

TEST_CASE("phase exponential: trivial and closed-channel values") {
  const auto grid = SpectralGrid::uniform(50.0, 2000);
  std::vector<cd> ones(grid.size(), cd(1.0));
  const auto d0 = extract_zeta(grid, ones, PhaseInput::s_samples);
  CHECK(phase_exponential(d0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  const double alpha = 0.7;
  std::vector<cd> S(grid.size());
  for (int i = 0; i < grid.size(); ++i) S[i] = UnitExp::S(alpha, grid[i]);
  const auto data = extract_zeta(grid, S, PhaseInput::s_samples);
  for (double lam : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double H = phase_exponential(data, lam);
    // H e^{i zeta} reproduces B+ (Riemann-problem uniqueness)
    int i = 0;
    while (grid[i] < lam - 1e-12) ++i;
    const cd rebuilt = H * std::exp(iu * data.zeta[i]);
    CHECK(std::abs(rebuilt - UnitExp::Bplus(alpha, lam)) < 1e-4);
    CHECK(phase_exponential(data, -lam) == doctest::Approx(H).epsilon(1e-12));
    CHECK(H > 0.0);
  }
}

TEST_CASE("auxiliary factor psi") {
  // independent of kappa and asymptotically lambda^{-2}
  double worst = 0.0;
  for (double lam = -10.0; lam <= 10.0; lam += 1.25) {
    if (lam == 0.0) continue;
    worst = std::max(worst, std::abs(aux_psi(lam, 0.5) - aux_psi(lam, 2.0)) /
                                aux_psi(lam, 1.0));
    CHECK(aux_psi(lam, 1.0) > 0.0);
  }
  CHECK(worst <= 1e-3);
  CHECK(std::abs(2500.0 * aux_psi(50.0, 1.0) - 1.0) < 0.05);
  CHECK_THROWS_AS(aux_psi(1.0, -2.0), Error);
  CHECK_THROWS_AS(aux_psi(0.0, 1.0), Error);
}

TEST_CASE("round trip without bound states") {
  const double alpha = 0.7;
  const auto pot = exp_pot(alpha);
  const auto fd = forward(pot);
  REQUIRE(fd.kappas.empty());
  REQUIRE(fd.profile.real_zeros.empty());

  const auto data = extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples);
  CHECK(data.tag == DataClass::omega0);
  const auto rec = reconstruct(data);

  CHECK(std::abs(rec.alpha - alpha) / alpha <= 1e-2);
  std::vector<double> want(fd.grid.size());
  for (int i = 0; i < fd.grid.size(); ++i) want[i] = UnitExp::Wsq(fd.grid[i]);
  CHECK(rel_l2(rec.Wabs_sq, want, fd.grid, 20.0) <= 1e-2);
  CHECK(rec.v_norm == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(rec.floor_magnitude <= 1e-8 * 2.0);  // max |W|^2 = 2

  // canonical representative matches the true kernel
  double vled = 0.0;
  for (std::size_t j = 0; j < rec.v_candidate.sample_x().size(); ++j) {
    const double x = rec.v_candidate.sample_x()[j];
    vled = std::max(vled, std::abs(rec.v_candidate.sample_v()[j] - cd(UnitExp::v(x))));
  }
  CHECK(vled < 5e-3);

  // the uncorrected constant differs by exactly pi^2/4
  CHECK(rec.alpha_legacy / rec.alpha == doctest::Approx(0.25 * oracle::pi * oracle::pi));
}

TEST_CASE("round trip through a bound state") {
  const double alpha = -4.0;
  const auto pot = exp_pot(alpha);
  const auto fd = forward(pot);
  REQUIRE(fd.kappas.size() == 1);
  CHECK(std::abs(fd.kappas[0] - 1.0) < 1e-4);

  const auto data =
      extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples, {}, fd.kappas);
  CHECK(data.tag == DataClass::omega_q_kappa);
  const auto rec = reconstruct(data);
  CHECK(std::abs(rec.alpha - alpha) / std::abs(alpha) <= 1e-2);
  std::vector<double> want(fd.grid.size());
  for (int i = 0; i < fd.grid.size(); ++i) want[i] = UnitExp::Wsq(fd.grid[i]);
  CHECK(rel_l2(rec.Wabs_sq, want, fd.grid, 20.0) <= 1e-2);
}

TEST_CASE("degenerate and inconsistent data") {
  const auto grid = SpectralGrid::uniform(50.0, 2000);
  std::vector<cd> ones(grid.size(), cd(1.0));
  const auto d0 = extract_zeta(grid, ones, PhaseInput::s_samples);
  // zero phase: the shape vanishes identically...
  const auto shape = reconstruct_Wsq_shape(d0);
  for (double s : shape) CHECK(s == 0.0);
  // ...and the coupling is undetermined
  CHECK_THROWS_AS(reconstruct_alpha(d0, shape), Error);

  // sign-corrupted phase puts the data outside the class
  const auto fd = forward(exp_pot(0.7));
  auto data = extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples);
  for (int i = 0; i < fd.grid.size(); ++i) {
    const double lam = fd.grid[i];
    if (lam > 3.0 && lam < 8.0) data.zeta[i] = -data.zeta[i];
    if (lam < -3.0 && lam > -8.0) data.zeta[i] = -data.zeta[i];
  }
  CHECK_THROWS_AS(reconstruct(data), Error);
}

TEST_CASE("class diagnostics") {
  const auto fd = forward(exp_pot(0.7));
  const auto data = extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples);
  const auto diag = validate_class(data);
  CHECK(diag.odd_error < 1e-12);
  CHECK(diag.sign_uniform);
  CHECK(diag.lambda_zeta_integrable);
  CHECK(diag.all_pass);
  CHECK(diag.approximate);

  // a phase decaying like 1/lambda fails the integrability condition
  ScatteringData slow = data;
  for (int i = 0; i < fd.grid.size(); ++i) {
    const double lam = fd.grid[i];
    slow.zeta[i] = lam == 0.0 ? 0.0 : 0.3 * lam / (1.0 + lam * lam);
  }
  CHECK_FALSE(validate_class(slow).lambda_zeta_integrable);

  // negative excursion breaks the sign condition
  ScatteringData dip = data;
  for (int i = 0; i < fd.grid.size(); ++i) {
    const double lam = fd.grid[i];
    const double bump = 0.3 * std::exp(-(lam - 5.0) * (lam - 5.0));
    dip.zeta[i] -= lam > 0.0 ? bump : -0.3 * std::exp(-(lam + 5.0) * (lam + 5.0));
  }
  CHECK_FALSE(validate_class(dip).sign_uniform);
}

TEST_CASE("independent channels invert separately") {
  SeparablePotential pot;
  pot.terms.push_back({0.5, HalfLineFunction::band_bump(0.5, 1.0)});
  pot.terms.push_back({-0.8, HalfLineFunction::band_bump(1.5, 2.0)});
  const auto fd = forward(pot, 40.0, 1600);
  REQUIRE(fd.kappas.empty());

  // each channel carries one real zero just outside its band; the channel
  // zero lists come from the per-channel forward problems
  std::vector<std::vector<double>> zeros(2);
  for (int k = 0; k < 2; ++k) {
    SeparablePotential sub;
    sub.terms.push_back(pot.terms[static_cast<std::size_t>(k)]);
    const auto sfd = forward(sub, 40.0, 1600);
    zeros[static_cast<std::size_t>(k)] = sfd.profile.real_zeros;
    REQUIRE(zeros[static_cast<std::size_t>(k)].size() == 1);
  }

  const auto recs = invert_channels(fd.profile.Sk, fd.grid, zeros, {{}, {}});
  REQUIRE(recs.size() == 2);
  CHECK(std::abs(recs[0].alpha - 0.5) / 0.5 <= 1e-2);
  CHECK(std::abs(recs[1].alpha + 0.8) / 0.8 <= 1e-2);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> want(fd.grid.size());
    for (int i = 0; i < fd.grid.size(); ++i) want[i] = std::norm(fd.ts.W_at(k, i));
    CHECK(rel_l2(recs[k].Wabs_sq, want, fd.grid, 20.0) <= 2e-2);
  }

  // swapping the channel order swaps the results
  const auto swapped = invert_channels({fd.profile.Sk[1], fd.profile.Sk[0]}, fd.grid,
                                       {zeros[1], zeros[0]}, {{}, {}});
  CHECK(swapped[0].alpha == doctest::Approx(recs[1].alpha));
  CHECK(swapped[1].alpha == doctest::Approx(recs[0].alpha));
}

TEST_CASE("round trip across a real zero") {
  // coupling tuned so the channel function vanishes at lambda0 = 3
  const auto b = HalfLineFunction::band_bump(1.0, 2.0);
  const cd I = oracle::integrate(
      [&](double t) {
        const double s = b.sine_transform(t).real();
        return oracle::cd(2.0 / oracle::pi * s * s / (t * t - 9.0));
      },
      0.95, 2.05, 1e-13);
  SeparablePotential pot;
  pot.terms.push_back({-1.0 / I.real(), b});
  const auto fd = forward(pot, 40.0, 1600);
  REQUIRE(fd.profile.real_zeros.size() == 1);

  const auto data = extract_zeta(fd.grid, fd.profile.S, PhaseInput::s_samples,
                                 fd.profile.real_zeros, {});
  CHECK(data.tag == DataClass::omega_q);
  const auto rec = reconstruct(data);
  CHECK(std::abs(rec.alpha - pot.alpha(0)) / pot.alpha(0) <= 2e-2);
  std::vector<double> want(fd.grid.size());
  for (int i = 0; i < fd.grid.size(); ++i) want[i] = std::norm(fd.ts.W_at(0, i));
  CHECK(rel_l2(rec.Wabs_sq, want, fd.grid, 20.0) <= 5e-2);
}

TEST_CASE("jump consistency and the Perron-Stieltjes cross-check") {
  const double alpha = 0.7;
  const auto fd = forward(exp_pot(alpha));
  double worst_jump = 0.0;
  std::vector<double> wsq(fd.grid.size());
  for (int i = 0; i < fd.grid.size(); ++i) {
    const double lam = fd.grid[i];
    wsq[i] = std::norm(fd.ts.W_at(0, i));
    if (!fd.profile.node_ok(i)) continue;
    const cd jump = fd.profile.bk_plus[0][i] - fd.profile.bk_minus[0][i];
    worst_jump =
        std::max(worst_jump, std::abs(jump - iu * alpha / (2.0 * lam) * wsq[i]));
  }
  CHECK(worst_jump <= 1e-6);

  CHECK(perron_stieltjes_check(fd.profile.bk_plus[0], fd.grid, alpha, wsq) <= 1e-4);

  // corrupted imaginary part shows up at the corruption scale
  std::vector<cd> bad = fd.profile.bk_plus[0];
  for (cd& z : bad) z = cd(z.real(), 1.1 * z.imag());
  const double res = perron_stieltjes_check(bad, fd.grid, alpha, wsq);
  CHECK(res > 0.05 * 2.0);  // ~10% of max |W|^2 = 2

  // zero data on both sides
  std::vector<cd> ones(fd.grid.size(), cd(1.0));
  std::vector<double> zeros(fd.grid.size(), 0.0);
  CHECK(perron_stieltjes_check(ones, fd.grid, alpha, zeros) == 0.0);
}
