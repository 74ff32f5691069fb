#include "scatter/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

#include "scatter/numeric.hpp"

namespace scatter {

namespace {

constexpr double kTransformTol = 1e-8;

// ---------------------------------------------------------------------------
// pointwise g strategies

// For an exponential first factor the correlation is separable:
//   g_{s,k}(y) = sqrt(2a) e^{-a y} * vtilde_k(-i a)   (y >= 0)
bool g_closed_form(const HalfLineFunction& fs, const HalfLineFunction& fk, double y,
                   cd* out) {
  if (fs.kind() == FunctionKind::exp_decay && y >= 0.0) {
    const double a = fs.exp_rate();
    *out = std::sqrt(2.0 * a) * std::exp(-a * y) * fk.vtilde(cd(0.0, -a));
    return true;
  }
  return false;
}

// x-domain correlation for fast-decay fs (sampled support is hard-truncated).
cd g_xdomain(const HalfLineFunction& fs, const HalfLineFunction& fk, double y) {
  if (y >= 0.0) {
    double X = fs.x_max();
    if (fs.kind() == FunctionKind::sampled) X = fs.x_max() - y;
    if (X <= 0.0) return 0.0;
    auto f = [&](double x) -> cd { return std::conj(fs.eval(x + y)) * fk.eval(x); };
    return adaptive_integrate(f, 0.0, X, 1e-12);
  }
  // g(y<0) = int_0^inf conj(v_s(u)) v_k(u + |y|) du
  const double ay = -y;
  const double X = fs.x_max();
  auto f = [&](double u) -> cd { return std::conj(fs.eval(u)) * fk.eval(u + ay); };
  return adaptive_integrate(f, 0.0, X, 1e-12);
}

// ---------------------------------------------------------------------------
// fixed rules

struct YRule {
  std::vector<double> y, w;
  std::vector<cd> g;
};

YRule make_y_rule(const HalfLineFunction& fs, const HalfLineFunction& fk,
                  double lam_max) {
  YRule r;
  const double Y = fs.x_max();
  const double width = std::min(0.4, 2.8 / std::max(1.0, lam_max));
  PanelRule pr;
  pr.append(0.0, Y, std::max(4, static_cast<int>(Y / width) + 1), 10);
  r.y = std::move(pr.x);
  r.w = std::move(pr.w);
  r.g.resize(r.y.size());
  for (std::size_t j = 0; j < r.y.size(); ++j) {
    cd val;
    if (!g_closed_form(fs, fk, r.y[j], &val)) val = g_xdomain(fs, fk, r.y[j]);
    r.g[j] = val;
  }
  return r;
}

struct MuRule {
  std::vector<double> x, w;
  std::vector<double> As;   // shat_s (real paths only)
  std::vector<cd> Bk, Ck;   // shat_k, chat_k
};

MuRule make_mu_rule(const HalfLineFunction& fs, const HalfLineFunction& fk,
                    double lo, double hi, int panels_per_unit) {
  MuRule r;
  PanelRule pr;
  // breakpoints at band edges plus margins: the cosine transform of a band
  // has boundary layers just outside the support
  std::vector<double> edges;
  for (const HalfLineFunction* f : {&fs, &fk})
    if (f->is_band()) {
      edges.push_back(f->band_lo());
      edges.push_back(f->band_hi());
    }
  std::vector<double> brk{lo, hi};
  for (double e : edges)
    for (double m : {e - 1.0, e, e + 1.0})
      if (m > lo && m < hi) brk.push_back(m);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  for (std::size_t j = 0; j + 1 < brk.size(); ++j) {
    const double a = brk[j], b = brk[j + 1];
    bool in_band = false, near_edge = false;
    const double mid = 0.5 * (a + b);
    for (const HalfLineFunction* f : {&fs, &fk})
      if (f->is_band() && mid > f->band_lo() && mid < f->band_hi()) in_band = true;
    for (double e : edges) near_edge = near_edge || std::min(std::abs(a - e), std::abs(b - e)) < 1.5;
    int per_unit = panels_per_unit;
    if (in_band)
      per_unit = 64;
    else if (near_edge)
      per_unit = 24;
    pr.append(a, b, std::max(4, static_cast<int>((b - a) * per_unit) + 1), 8);
  }
  r.x = std::move(pr.x);
  r.w = std::move(pr.w);
  r.As.resize(r.x.size());
  r.Bk.resize(r.x.size());
  r.Ck.resize(r.x.size());
  for (std::size_t j = 0; j < r.x.size(); ++j) {
    r.As[j] = fs.sine_transform(r.x[j]).real();
    r.Bk[j] = fk.sine_transform(r.x[j]);
    r.Ck[j] = fk.cos_transform(r.x[j]);
  }
  return r;
}

// spans used by the spectral pair rules (fixed so the rules are cacheable)
void mu_rule_span(const HalfLineFunction& fs, const HalfLineFunction& fk, double* lo,
                  double* hi) {
  if (fs.is_band()) {
    *lo = fs.band_lo();
    *hi = fs.band_hi();
  } else {
    *lo = 0.0;
    *hi = std::max(240.0, fk.is_band() ? 3.0 * fk.band_hi() : 0.0);
  }
}

// cached rules for catalog pairs (the band cosine transform is expensive
// enough that rebuilding it per evaluation dominates everything else)
const MuRule& mu_rule_cached(const HalfLineFunction& fs, const HalfLineFunction& fk) {
  static std::mutex mtx;
  static std::map<std::string, MuRule> cache;
  char key[160];
  auto tag = [](const HalfLineFunction& f, char* out, std::size_t n) {
    if (f.kind() == FunctionKind::exp_decay)
      std::snprintf(out, n, "e:%.17g", f.exp_rate());
    else
      std::snprintf(out, n, "b:%.17g:%.17g", f.band_lo(), f.band_hi());
  };
  char t1[72], t2[72];
  tag(fs, t1, sizeof t1);
  tag(fk, t2, sizeof t2);
  std::snprintf(key, sizeof key, "%s|%s", t1, t2);
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  double lo, hi;
  mu_rule_span(fs, fk, &lo, &hi);
  return cache.emplace(key, make_mu_rule(fs, fk, lo, hi, fs.is_band() ? 64 : 2))
      .first->second;
}

bool cacheable_pair(const HalfLineFunction& fs, const HalfLineFunction& fk) {
  return fs.kind() != FunctionKind::sampled && fk.kind() != FunctionKind::sampled;
}

// Band-limited fs (real): spectral form valid for all real y,
//   g(y) = (2/pi) int shat_s(mu) [shat_k(mu) cos(mu y) + chat_k(mu) sin(mu y)] dmu
// with the integrand supported on fs's band.
cd g_mudomain(const HalfLineFunction& fs, const HalfLineFunction& fk, double y) {
  if (cacheable_pair(fs, fk)) {
    const MuRule& r = mu_rule_cached(fs, fk);
    std::vector<cd> terms(r.x.size());
    for (std::size_t j = 0; j < r.x.size(); ++j)
      terms[j] = r.w[j] * r.As[j] *
                 (r.Bk[j] * std::cos(r.x[j] * y) + r.Ck[j] * std::sin(r.x[j] * y));
    return (2.0 / pi) * pairwise_sum(std::span<const cd>(terms));
  }
  auto f = [&](double mu) -> cd {
    const double a = fs.sine_transform(mu).real();
    if (a == 0.0) return 0.0;
    return a * (fk.sine_transform(mu) * std::cos(mu * y) +
                fk.cos_transform(mu) * std::sin(mu * y));
  };
  return (2.0 / pi) * adaptive_integrate(f, fs.band_lo(), fs.band_hi(), 1e-12);
}

// PV int F(mu)/(mu^2 - lam^2) dmu over rule nodes spanning [lo,hi], with F
// given at nodes and F0 = F(|lam|) supplied by the caller when |lam| lies
// inside the span.
cd pv_rule(const std::vector<double>& x, const std::vector<double>& w,
           const std::vector<cd>& F, double lo, double hi, double lam, cd F0) {
  const double t0 = std::abs(lam);
  std::vector<cd> terms;
  terms.reserve(x.size());
  if (t0 > lo && t0 < hi) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double dm = x[j] - t0;
      cd sub;
      if (std::abs(dm) < 1e-12)
        sub = 0.0;  // smooth difference quotient; node-on-pole contributes O(h f')
      else
        sub = (F[j] - F0) / dm;
      terms.push_back(w[j] * (sub / (x[j] + t0)));
    }
    cd out = pairwise_sum(std::span<const cd>(terms));
    // remaining exact pieces: F0 * PV int 1/((mu-t0)(mu+t0))
    out += F0 / (2.0 * t0) *
           (std::log((hi - t0) / (t0 - lo)) - std::log((hi + t0) / (lo + t0)));
    return out;
  }
  for (std::size_t j = 0; j < x.size(); ++j)
    terms.push_back(w[j] * F[j] / (x[j] * x[j] - lam * lam));
  return pairwise_sum(std::span<const cd>(terms));
}

}  // namespace

// ---------------------------------------------------------------------------
// public pointwise ops

cd cross_corr_g_point(const HalfLineFunction& fs, const HalfLineFunction& fk, double y) {
  cd out;
  if (g_closed_form(fs, fk, y, &out)) return out;
  if (y >= 0.0) {
    if (fs.is_band()) return g_mudomain(fs, fk, y);
    if (fs.fast_decay()) return g_xdomain(fs, fk, y);
    throw Error(Errc::accuracy, "cross_corr_g: unsupported pair decay structure");
  }
  // y < 0: g(y) = int conj(v_s(u)) v_k(u + |y|) du; the sine-band expansion
  // does not apply across the reflection, so integrate whichever factor
  // decays fast
  if (fs.fast_decay()) return g_xdomain(fs, fk, y);
  if (fk.fast_decay()) {
    const double ay = -y;
    const double X = fk.x_max();
    auto f = [&](double u) -> cd { return std::conj(fs.eval(u)) * fk.eval(u + ay); };
    return adaptive_integrate(f, 0.0, std::max(0.0, X - ay), 1e-12);
  }
  return std::conj(cross_corr_g_point(fk, fs, -y));
}

std::vector<cd> cross_corr_g(const HalfLineFunction& fs, const HalfLineFunction& fk,
                             const std::vector<double>& ygrid) {
  for (double y : ygrid)
    if (y < 0.0) throw Error(Errc::domain, "cross_corr_g: y grid must be >= 0");
  // truncation-model error estimate for the tabulated form
  if (fs.kind() == FunctionKind::sampled || fk.kind() == FunctionKind::sampled) {
    const double X = std::min(fs.x_max(), fk.x_max());
    const double est =
        fs.decay_bound() * fk.decay_bound() / (3.0 * std::pow(1.0 + X, 3));
    if (est > kTransformTol)
      throw Error(Errc::accuracy,
                  "cross_corr_g: tail estimate " + std::to_string(est) +
                      " exceeds tolerance; extend the sampled domain");
  }
  std::vector<cd> out(ygrid.size());
  parallel_for(ygrid.size(),
               [&](std::size_t j) { out[j] = cross_corr_g_point(fs, fk, ygrid[j]); });
  return out;
}

cd Phi_point(const HalfLineFunction& fs, const HalfLineFunction& fk, cd mu) {
  if (mu.imag() > 1e-14) throw Error(Errc::domain, "Phi_point: need Im(mu) <= 0");

  // exponential first factor: the correlation is separable and transforms
  // in closed form for any second factor
  if (fs.kind() == FunctionKind::exp_decay) {
    const double a = fs.exp_rate();
    return std::sqrt(2.0 * a) * fk.vtilde(cd(0.0, -a)) / (a + iu * mu);
  }

  if (fs.fast_decay() && !fk.is_band()) {
    // transform of the correlation over its (fast-decaying) support
    YRule rule = make_y_rule(fs, fk, std::abs(mu.real()));
    std::vector<cd> terms(rule.y.size());
    for (std::size_t j = 0; j < rule.y.size(); ++j)
      terms[j] = rule.w[j] * std::exp(-iu * mu * rule.y[j]) * rule.g[j];
    return pairwise_sum(std::span<const cd>(terms));
  }

  if (!fs.is_real())
    throw Error(Errc::accuracy, "Phi_point: unsupported pair decay structure");

  // spectral route:
  //   Phi(mu) = (2/pi) int shat_s(nu) [i mu shat_k(nu) + nu chat_k(nu)] /
  //             (nu^2 - mu^2) dnu   (+ on-axis delta terms for real mu)
  const double lam = mu.real();
  double lo, hi;
  mu_rule_span(fs, fk, &lo, &hi);

  // the cached node rule resolves poles no closer than a few node spacings
  double pole_dist = 1.0;
  if (mu.imag() != 0.0) {
    const cd z2 = mu * mu;
    if (z2.real() < lo * lo)
      pole_dist = std::abs(z2 - cd(lo * lo, 0.0));
    else if (z2.real() > hi * hi)
      pole_dist = std::abs(z2 - cd(hi * hi, 0.0));
    else
      pole_dist = std::abs(z2.imag());
  }
  if (cacheable_pair(fs, fk) && (mu.imag() == 0.0 || pole_dist > 0.05)) {
    const MuRule& r = mu_rule_cached(fs, fk);
    std::vector<cd> F(r.x.size());
    for (std::size_t j = 0; j < r.x.size(); ++j)
      F[j] = r.As[j] * (iu * mu * r.Bk[j] + r.x[j] * r.Ck[j]);
    if (mu.imag() < 0.0) {
      std::vector<cd> terms(r.x.size());
      for (std::size_t j = 0; j < r.x.size(); ++j)
        terms[j] = r.w[j] * F[j] / (r.x[j] * r.x[j] - mu * mu);
      return (2.0 / pi) * pairwise_sum(std::span<const cd>(terms));
    }
    const double t0 = std::abs(lam);
    const double sgn = (lam >= 0.0) ? 1.0 : -1.0;
    const cd sh_s = fs.sine_transform(t0);
    const cd sh_k = fk.sine_transform(t0);
    const cd ch_k = fk.cos_transform(t0);
    const cd F0 = sh_s.real() * (iu * lam * sh_k + t0 * ch_k);
    const cd pv = pv_rule(r.x, r.w, F, lo, hi, lam, F0);
    return (2.0 / pi) * pv + sh_s.real() * sh_k - iu * sgn * sh_s.real() * ch_k;
  }

  auto Ffun = [&](double nu) -> cd {
    const double a = fs.sine_transform(nu).real();
    if (a == 0.0) return 0.0;
    return a * (iu * mu * fk.sine_transform(nu) + nu * fk.cos_transform(nu));
  };

  if (mu.imag() < 0.0) {
    auto whole = [&](double nu) -> cd { return Ffun(nu) / (nu * nu - mu * mu); };
    return (2.0 / pi) * adaptive_integrate(whole, lo, hi, 1e-11);
  }

  // real axis: PV plus delta terms
  const double t0 = std::abs(lam);
  const double sgn = (lam >= 0.0) ? 1.0 : -1.0;
  const cd sh_s = fs.sine_transform(t0);
  const cd sh_k = fk.sine_transform(t0);
  const cd ch_k = fk.cos_transform(t0);
  const cd F0 = sh_s.real() * (iu * lam * sh_k + t0 * ch_k);

  cd pv;
  if (t0 > lo && t0 < hi) {
    auto reg = [&](double nu) -> cd {
      const double d = nu * nu - t0 * t0;
      if (std::abs(nu - t0) < 1e-9) {
        const double e = 1e-6 * std::max(1.0, hi - lo);
        return (Ffun(t0 + e) - Ffun(t0 - e)) / (2.0 * e) / (2.0 * t0);
      }
      return (Ffun(nu) - F0) / d;
    };
    pv = adaptive_integrate(reg, lo, t0, 1e-11) + adaptive_integrate(reg, t0, hi, 1e-11);
    pv += F0 / (2.0 * t0) *
          (std::log((hi - t0) / (t0 - lo)) - std::log((hi + t0) / (lo + t0)));
  } else {
    auto whole = [&](double nu) -> cd { return Ffun(nu) / (nu * nu - lam * lam); };
    pv = adaptive_integrate(whole, lo, hi, 1e-11);
  }
  return (2.0 / pi) * pv + sh_s.real() * sh_k - iu * sgn * sh_s.real() * ch_k;
}

cd varphi_point(const HalfLineFunction& fs, const HalfLineFunction& fk, double lam) {
  const double t0 = std::abs(lam);

  if (fs.kind() == FunctionKind::exp_decay) {
    const double a = fs.exp_rate();
    return std::sqrt(2.0 * a) * std::conj(fk.vtilde(cd(0.0, -a))) /
           (a * a + lam * lam);
  }

  if (fs.is_real() && fk.is_real() && (fs.is_band() || fk.is_band())) {
    // phi = -(2/pi) PV int shat_s shat_k /(mu^2-lam^2) dmu + shat_s chat_k / |lam|
    double lo, hi;
    if (fs.is_band() && fk.is_band()) {
      lo = std::max(fs.band_lo(), fk.band_lo());
      hi = std::min(fs.band_hi(), fk.band_hi());
    } else if (fs.is_band()) {
      lo = fs.band_lo();
      hi = fs.band_hi();
    } else {
      lo = fk.band_lo();
      hi = fk.band_hi();
    }
    cd pv = 0.0;
    if (hi > lo) {
      auto P = [&](double nu) -> cd {
        return fs.sine_transform(nu).real() * fk.sine_transform(nu).real();
      };
      const cd P0 = P(t0);
      if (cacheable_pair(fs, fk)) {
        const MuRule& r = mu_rule_cached(fs, fk);
        std::vector<cd> F(r.x.size());
        for (std::size_t j = 0; j < r.x.size(); ++j) {
          const double nu = r.x[j];
          F[j] = (nu > lo && nu < hi) ? cd(r.As[j]) * r.Bk[j].real() : cd(0.0);
        }
        double rlo, rhi;
        mu_rule_span(fs, fk, &rlo, &rhi);
        pv = pv_rule(r.x, r.w, F, rlo, rhi, lam, (t0 > lo && t0 < hi) ? P0 : cd(0.0));
      } else if (t0 > lo && t0 < hi) {
        auto reg = [&](double nu) -> cd {
          const double d = nu - t0;
          if (std::abs(d) < 1e-9) return 0.0;
          return (P(nu) - P0) / d / (nu + t0);
        };
        pv = adaptive_integrate(reg, lo, t0, 1e-12) +
             adaptive_integrate(reg, t0, hi, 1e-12);
        pv += P0 / (2.0 * t0) *
              (std::log((hi - t0) / (t0 - lo)) - std::log((hi + t0) / (lo + t0)));
      } else {
        auto whole = [&](double nu) -> cd { return P(nu) / (nu * nu - lam * lam); };
        pv = adaptive_integrate(whole, lo, hi, 1e-12);
      }
    }
    cd second;
    if (t0 < 1e-9) {
      // shat_s(t)/t -> d shat_s/dt at 0 (zero for bands)
      double slope = 0.0;
      if (fs.kind() == FunctionKind::exp_decay)
        slope = std::sqrt(2.0 * fs.exp_rate()) / (fs.exp_rate() * fs.exp_rate());
      second = slope * fk.cos_transform(0.0);
    } else {
      second = fs.sine_transform(t0).real() * fk.cos_transform(t0) / t0;
    }
    return -(2.0 / pi) * pv + second;
  }

  if (!fs.fast_decay())
    throw Error(Errc::accuracy, "varphi: unsupported pair decay structure");

  // y-domain: int sinc_lam(y) conj(g_{s,k}(y)) dy over the fast support
  YRule rule = make_y_rule(fs, fk, std::max(1.0, t0));
  std::vector<cd> terms(rule.y.size());
  for (std::size_t j = 0; j < rule.y.size(); ++j)
    terms[j] = rule.w[j] * sinc_lam(t0, rule.y[j]) * std::conj(rule.g[j]);
  return pairwise_sum(std::span<const cd>(terms));
}

cd pv_sine_product(const HalfLineFunction& fs, const HalfLineFunction& fk, double lam) {
  if (!fs.is_real() || !fk.is_real())
    throw Error(Errc::domain, "pv_sine_product: real-valued kernels only");
  const double t0 = std::abs(lam);
  auto P = [&](double t) -> cd {
    return fs.sine_transform(t).real() * fk.sine_transform(t).real();
  };
  if (cacheable_pair(fs, fk)) {
    const MuRule& r = mu_rule_cached(fs, fk);
    double lo, hi;
    mu_rule_span(fs, fk, &lo, &hi);
    std::vector<cd> F(r.x.size());
    for (std::size_t j = 0; j < r.x.size(); ++j) F[j] = r.As[j] * r.Bk[j].real();
    cd pv = pv_rule(r.x, r.w, F, lo, hi, t0, P(t0));
    if (!fs.is_band()) {
      // fitted t^{-4} tail of the product beyond the rule span
      const cd K = F.back() * std::pow(r.x.back(), 4);
      auto tail = [&](double u) -> cd {
        const double t = hi * std::exp(u);
        return K / std::pow(t, 4) / (t * t - t0 * t0) * t;
      };
      pv += integrate_gl(tail, 0.0, std::log(1e6), 24, 12);
    }
    return pv;
  }
  const double T = std::max(300.0, 3.0 * t0);
  const cd P0 = P(t0);
  auto reg = [&](double t) -> cd {
    if (std::abs(t - t0) < 1e-9) return 0.0;
    return (P(t) - P0) / (t * t - t0 * t0);
  };
  cd pv = adaptive_integrate(reg, 0.0, t0, 1e-11) + adaptive_integrate(reg, t0, T, 1e-11);
  pv += P0 / (2.0 * t0) * std::log((T - t0) / (T + t0));
  return pv;
}

std::vector<cd> varphi_grid(const HalfLineFunction& fs, const HalfLineFunction& fk,
                            const SpectralGrid& grid) {
  const int i0 = grid.zero_index();
  std::vector<cd> out(static_cast<std::size_t>(grid.size()));
  const bool closed = fs.kind() == FunctionKind::exp_decay ||
                      (fs.is_real() && fk.is_real() && (fs.is_band() || fk.is_band()));
  if (closed) {
    parallel_for(static_cast<std::size_t>(grid.half_size()), [&](std::size_t jj) {
      const int i = i0 + static_cast<int>(jj);
      const cd val = varphi_point(fs, fk, grid[i]);
      out[static_cast<std::size_t>(i)] = val;
      out[static_cast<std::size_t>(grid.mirror(i))] = val;
    });
    return out;
  }
  if (!fs.fast_decay())
    throw Error(Errc::accuracy, "varphi: unsupported pair decay structure");
  YRule rule = make_y_rule(fs, fk, grid.lambda_max());
  parallel_for(static_cast<std::size_t>(grid.half_size()), [&](std::size_t jj) {
    const int i = i0 + static_cast<int>(jj);
    const double lam = grid[i];
    std::vector<cd> terms(rule.y.size());
    for (std::size_t j = 0; j < rule.y.size(); ++j)
      terms[j] = rule.w[j] * sinc_lam(lam, rule.y[j]) * std::conj(rule.g[j]);
    const cd val = pairwise_sum(std::span<const cd>(terms));
    out[static_cast<std::size_t>(i)] = val;
    out[static_cast<std::size_t>(grid.mirror(i))] = val;
  });
  return out;
}

// ---------------------------------------------------------------------------
// grid ops

std::vector<cd> fourier_vtilde(const HalfLineFunction& f, const SpectralGrid& grid) {
  if (f.kind() == FunctionKind::sampled) {
    const double est = f.decay_bound() / (1.0 + f.x_max());
    if (est > kTransformTol)
      throw Error(Errc::accuracy,
                  "fourier_vtilde: truncation estimate " + std::to_string(est) +
                      " exceeds tolerance; extend the sampled domain");
  }
  const int i0 = grid.zero_index();
  std::vector<cd> out(static_cast<std::size_t>(grid.size()));
  parallel_for(static_cast<std::size_t>(grid.half_size()), [&](std::size_t jj) {
    const int i = i0 + static_cast<int>(jj);
    const double lam = grid[i];
    const cd c = f.cos_transform(lam);
    const cd s = f.sine_transform(lam);
    out[static_cast<std::size_t>(i)] = c - iu * s;
    out[static_cast<std::size_t>(grid.mirror(i))] = c + iu * s;
  });
  return out;
}

std::vector<cd> sine_W(const HalfLineFunction& f, const SpectralGrid& grid) {
  const int i0 = grid.zero_index();
  std::vector<cd> out(static_cast<std::size_t>(grid.size()));
  parallel_for(static_cast<std::size_t>(grid.half_size()), [&](std::size_t jj) {
    const int i = i0 + static_cast<int>(jj);
    const cd w = -2.0 * iu * f.sine_transform(grid[i]);
    out[static_cast<std::size_t>(i)] = w;
    out[static_cast<std::size_t>(grid.mirror(i))] = -w;
  });
  out[static_cast<std::size_t>(i0)] = 0.0;
  return out;
}

std::vector<cd> phi_Phi(const std::vector<double>& ygrid, const std::vector<cd>& gvals,
                        const SpectralGrid& grid) {
  if (ygrid.size() != gvals.size() || ygrid.size() < 2)
    throw Error(Errc::data, "phi_Phi: mismatched sample arrays");
  std::vector<cd> out(static_cast<std::size_t>(grid.size()));
  parallel_for(static_cast<std::size_t>(grid.size()), [&](std::size_t i) {
    out[i] = fourier_linear_interp(ygrid, gvals, cd(grid[static_cast<int>(i)], 0.0));
  });
  return out;
}

TransformSet build_transforms(const SeparablePotential& pot, const SpectralGrid& grid,
                              double y_span, int ny) {
  pot.validate();
  const int n = pot.n();
  TransformSet ts;
  ts.grid = grid;
  ts.pot = pot;
  ts.vt.resize(static_cast<std::size_t>(n));
  ts.W.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ts.vt[static_cast<std::size_t>(k)] = fourier_vtilde(pot.v(k), grid);
    ts.W[static_cast<std::size_t>(k)] = sine_W(pot.v(k), grid);
  }

  ts.Phi.assign(static_cast<std::size_t>(n),
                std::vector<std::vector<cd>>(static_cast<std::size_t>(n)));
  const int i0 = grid.zero_index();
  for (int s = 0; s < n; ++s) {
    for (int k = 0; k < n; ++k) {
      const HalfLineFunction& fs = pot.v(s);
      const HalfLineFunction& fk = pot.v(k);
      std::vector<cd> col(static_cast<std::size_t>(grid.size()));
      const bool mirror_ok = fs.is_real() && fk.is_real();

      if (fs.kind() == FunctionKind::exp_decay) {
        const double a = fs.exp_rate();
        const cd J = std::sqrt(2.0 * a) * fk.vtilde(cd(0.0, -a));
        for (int i = 0; i < grid.size(); ++i)
          col[static_cast<std::size_t>(i)] = J / (a + iu * grid[i]);
      } else if (fs.fast_decay() && !fk.is_band()) {
        // one cached correlation rule serves every lambda
        YRule rule = make_y_rule(fs, fk, grid.lambda_max());
        auto eval = [&](double lam) -> cd {
          std::vector<cd> terms(rule.y.size());
          for (std::size_t j = 0; j < rule.y.size(); ++j)
            terms[j] = rule.w[j] * std::exp(-iu * lam * rule.y[j]) * rule.g[j];
          return pairwise_sum(std::span<const cd>(terms));
        };
        parallel_for(static_cast<std::size_t>(mirror_ok ? grid.half_size() : grid.size()),
                     [&](std::size_t jj) {
                       if (mirror_ok) {
                         const int i = i0 + static_cast<int>(jj);
                         col[static_cast<std::size_t>(i)] = eval(grid[i]);
                         col[static_cast<std::size_t>(grid.mirror(i))] =
                             std::conj(col[static_cast<std::size_t>(i)]);
                       } else {
                         col[jj] = eval(grid[static_cast<int>(jj)]);
                       }
                     });
      } else if (fs.is_real()) {
        // spectral route with cached node data
        double lo, hi;
        mu_rule_span(fs, fk, &lo, &hi);
        if (2.0 * grid.lambda_max() + 10.0 > hi && !fs.is_band())
          throw Error(Errc::domain, "build_transforms: grid span exceeds the pair rule");
        const MuRule mr = cacheable_pair(fs, fk)
                              ? mu_rule_cached(fs, fk)
                              : make_mu_rule(fs, fk, lo, hi, fs.is_band() ? 64 : 2);
        auto eval = [&](double lam) -> cd {
          const double t0 = std::abs(lam);
          const double sgn = (lam >= 0.0) ? 1.0 : -1.0;
          std::vector<cd> F(mr.x.size());
          for (std::size_t j = 0; j < mr.x.size(); ++j)
            F[j] = mr.As[j] * (iu * lam * mr.Bk[j] + mr.x[j] * mr.Ck[j]);
          const cd sh_s = fs.sine_transform(t0);
          const cd sh_k = fk.sine_transform(t0);
          const cd ch_k = fk.cos_transform(t0);
          const cd F0 = sh_s.real() * (iu * lam * sh_k + t0 * ch_k);
          cd pv = pv_rule(mr.x, mr.w, F, lo, hi, lam, F0);
          return (2.0 / pi) * pv + sh_s.real() * sh_k - iu * sgn * sh_s.real() * ch_k;
        };
        parallel_for(static_cast<std::size_t>(mirror_ok ? grid.half_size() : grid.size()),
                     [&](std::size_t jj) {
                       if (mirror_ok) {
                         const int i = i0 + static_cast<int>(jj);
                         col[static_cast<std::size_t>(i)] = eval(grid[i]);
                         col[static_cast<std::size_t>(grid.mirror(i))] =
                             std::conj(col[static_cast<std::size_t>(i)]);
                       } else {
                         col[jj] = eval(grid[static_cast<int>(jj)]);
                       }
                     });
      } else {
        throw Error(Errc::accuracy, "build_transforms: unsupported pair decay structure");
      }
      ts.Phi[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] = std::move(col);
    }
  }

  ts.ygrid.resize(static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j)
    ts.ygrid[static_cast<std::size_t>(j)] = y_span * j / (ny - 1);
  ts.g.assign(static_cast<std::size_t>(n),
              std::vector<std::vector<cd>>(static_cast<std::size_t>(n)));
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k)
      ts.g[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] =
          cross_corr_g(pot.v(s), pot.v(k), ts.ygrid);
  return ts;
}

// ---------------------------------------------------------------------------
// inverse sine transform and norms

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 25.0) {
    auto f = [](double t) -> cd { return t < 1e-12 ? cd(1.0) : cd(std::sin(t) / t); };
    return adaptive_integrate(f, 0.0, x, 1e-13).real();
  }
  // asymptotic auxiliary series, |error| < 1e-9 for x > 25
  const double x2 = x * x;
  double fsum = 0.0, gsum = 0.0, fterm = 1.0 / x, gterm = 1.0 / x2;
  static const double fc[] = {1.0, 2.0, 24.0, 720.0, 40320.0, 3628800.0, 479001600.0};
  static const double gc[] = {1.0, 6.0, 120.0, 5040.0, 362880.0, 39916800.0};
  for (int m = 0; m < 7; ++m) {
    fsum += ((m % 2) ? -1.0 : 1.0) * fc[m] * fterm;
    fterm /= x2;
  }
  for (int m = 0; m < 6; ++m) {
    gsum += ((m % 2) ? -1.0 : 1.0) * gc[m] * gterm;
    gterm /= x2;
  }
  return 0.5 * pi - fsum * std::cos(x) - gsum * std::sin(x);
}

HalfLineFunction inverse_sine_recover_v(const std::vector<double>& wabs,
                                        const SpectralGrid& grid,
                                        const std::vector<double>& xgrid) {
  if (static_cast<int>(wabs.size()) != grid.size())
    throw Error(Errc::data, "inverse_sine_recover_v: sample count mismatch");
  double wmax = 0.0;
  for (double w : wabs) {
    if (!(w >= 0.0)) throw Error(Errc::data, "inverse_sine_recover_v: |W| must be >= 0");
    wmax = std::max(wmax, w);
  }
  const int i0 = grid.zero_index();
  if (wmax > 0.0 && wabs[static_cast<std::size_t>(i0)] > 1e-6 * wmax)
    throw Error(Errc::inconsistent_data, "inverse_sine_recover_v: |W|(0) must vanish");

  // half-line weights and a 1/lambda tail coefficient from trailing samples
  const std::vector<double> half(grid.points().begin() + i0, grid.points().end());
  const std::vector<double> hw = sample_quad_weights(half);
  const int nh = static_cast<int>(half.size());
  double c_tail = 0.0;
  {
    int m = std::max(4, nh / 20);
    std::vector<double> vals;
    for (int j = nh - m; j < nh; ++j)
      vals.push_back(0.5 * wabs[static_cast<std::size_t>(i0 + j)] * half[static_cast<std::size_t>(j)]);
    for (double v : vals) c_tail += v;
    c_tail /= static_cast<double>(vals.size());
  }
  const double lam_max = grid.lambda_max();

  std::vector<cd> vx(xgrid.size());
  parallel_for(xgrid.size(), [&](std::size_t jx) {
    const double x = xgrid[jx];
    std::vector<double> terms(static_cast<std::size_t>(nh));
    for (int j = 0; j < nh; ++j)
      terms[static_cast<std::size_t>(j)] =
          hw[static_cast<std::size_t>(j)] * std::sin(half[static_cast<std::size_t>(j)] * x) *
          0.5 * wabs[static_cast<std::size_t>(i0 + j)];
    double head = pairwise_sum(std::span<const double>(terms));
    const double tail = c_tail * (0.5 * pi - sine_integral(lam_max * x));
    vx[jx] = (2.0 / pi) * (head + tail);
  });

  // conservative decay bound from the trailing recovered values
  double C = 0.0;
  for (std::size_t j = xgrid.size() - std::min<std::size_t>(8, xgrid.size());
       j < xgrid.size(); ++j)
    C = std::max(C, std::abs(vx[j]) * (1.0 + xgrid[j]) * (1.0 + xgrid[j]));
  return HalfLineFunction::sampled(xgrid, vx, C);
}

double parseval_W_norm(const std::vector<cd>& w, const SpectralGrid& grid) {
  if (static_cast<int>(w.size()) != grid.size())
    throw Error(Errc::data, "parseval_W_norm: sample count mismatch");
  const auto& qw = grid.quad_weights();
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = qw[i] * std::norm(w[i]);
  double head = pairwise_sum(std::span<const double>(terms));

  // two-term even power tail |W|^2 ~ c0/t^2 + c1/t^4
  const int i0 = grid.zero_index();
  const int nh = grid.half_size();
  const int m = std::max(6, nh / 20);
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (int j = nh - m; j < nh; ++j) {
    const double t = grid[i0 + j];
    const double y = std::norm(w[static_cast<std::size_t>(i0 + j)]);
    const double f1 = 1.0 / (t * t), f2 = 1.0 / (t * t * t * t);
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
  const double L = grid.lambda_max();
  const double tail = c0 / L + c1 / (3.0 * L * L * L);
  return head + 2.0 * std::max(0.0, tail);
}

}  // namespace scatter
