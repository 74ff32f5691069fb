#include "scatter/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "scatter/numeric.hpp"

namespace scatter {

namespace {

// C-infinity bump on (-1,1), flat to all orders at the edges.
double bump(double u) {
  const double s = 1.0 - u * u;
  if (s <= 1e-14) return 0.0;
  return std::exp(-1.0 / s);
}

double bump_d1(double u) {
  const double s = 1.0 - u * u;
  if (s <= 1e-14) return 0.0;
  return bump(u) * (-2.0 * u / (s * s));
}

cd adaptive_impl(const std::function<cd(double)>& f, double a, double b,
                 double tol, int depth) {
  const cd coarse = integrate_gl(f, a, b, 1, 8);
  const cd fine = integrate_gl(f, a, b, 1, 16);
  if (std::abs(fine - coarse) < tol || depth <= 0) return fine;
  const double m = 0.5 * (a + b);
  return adaptive_impl(f, a, m, 0.5 * tol, depth - 1) +
         adaptive_impl(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace

cd adaptive_integrate(const std::function<cd(double)>& f, double a, double b,
                      double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  return adaptive_impl(f, a, b, tol, max_depth);
}

cd pv_interval(const std::function<cd(double)>& f, double a, double b,
               double pole, double tol) {
  if (!(pole > a && pole < b))
    throw Error(Errc::domain, "pv_interval: pole must lie inside (a,b)");
  const cd fp = f(pole);
  const double eps = 1e-7 * (b - a);
  const cd fprime = (f(pole + eps) - f(pole - eps)) / (2.0 * eps);
  auto reg = [&](double nu) -> cd {
    const double d = nu - pole;
    if (std::abs(d) < eps) return fprime;
    return (f(nu) - fp) / d;
  };
  cd out = adaptive_integrate(reg, a, pole, 0.5 * tol) +
           adaptive_integrate(reg, pole, b, 0.5 * tol);
  out += fp * std::log((b - pole) / (pole - a));
  return out;
}

// ---------------------------------------------------------------------------
// catalog constructors

HalfLineFunction HalfLineFunction::exp_decay(double a) {
  if (!(a > 0.0)) throw Error(Errc::domain, "exp_decay: rate must be positive");
  HalfLineFunction f;
  f.kind_ = FunctionKind::exp_decay;
  f.a_ = a;
  f.x_max_ = 41.5 / a;
  f.decay_bound_ = std::sqrt(2.0 * a) * std::exp(-a * f.x_max_) * (1.0 + f.x_max_) * (1.0 + f.x_max_);
  f.real_valued_ = true;
  return f;
}

HalfLineFunction HalfLineFunction::band_bump(double lo, double hi) {
  if (!(0.0 < lo && lo < hi))
    throw Error(Errc::domain, "band_bump: need 0 < lo < hi");
  HalfLineFunction f;
  f.kind_ = FunctionKind::band_bump;
  f.lo_ = lo;
  f.hi_ = hi;
  f.real_valued_ = true;
  const double w = hi - lo;
  // || shat ||_2^2 = pi/2 makes ||v||_2 = 1 by the sine-transform Parseval.
  auto b2 = [&](double t) -> cd {
    const double u = (2.0 * t - lo - hi) / w;
    const double bv = bump(u);
    return bv * bv;
  };
  const double i2 = adaptive_integrate(b2, lo, hi, 1e-14).real();
  f.amp_ = std::sqrt(0.5 * pi / i2);
  // |v(x)| <= (2/pi) ||shat''||_1 / x^2 after two integrations by parts.
  auto absd2 = [&](double u) -> cd {
    const double s = 1.0 - u * u;
    if (s <= 1e-14) return 0.0;
    const double g1 = 2.0 * u / (s * s);
    const double g2 = (2.0 + 6.0 * u * u) / (s * s * s);
    return std::abs((g1 * g1 - g2) * bump(u));
  };
  const double d2l1 = f.amp_ * (2.0 / w) * adaptive_integrate(absd2, -1.0, 1.0, 1e-12).real();
  f.decay_bound_ = (2.0 / pi) * d2l1 * 1.5;
  f.x_max_ = std::sqrt(std::max(1.0, f.decay_bound_) * 1e12);
  return f;
}

HalfLineFunction HalfLineFunction::sampled(std::vector<double> x, std::vector<cd> v,
                                           double decay_bound) {
  if (x.size() < 2 || x.size() != v.size())
    throw Error(Errc::data, "sampled: need matching node/value lists with >= 2 entries");
  if (x.front() < 0.0) throw Error(Errc::domain, "sampled: nodes must be >= 0");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw Error(Errc::data, "sampled: nodes must increase");
  for (const cd& val : v)
    if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
      throw Error(Errc::data, "sampled: non-finite value");
  HalfLineFunction f;
  f.kind_ = FunctionKind::sampled;
  f.sx_ = std::move(x);
  f.sv_ = std::move(v);
  f.x_max_ = f.sx_.back();
  f.decay_bound_ = decay_bound;
  f.real_valued_ = std::all_of(f.sv_.begin(), f.sv_.end(),
                               [](const cd& z) { return z.imag() == 0.0; });
  return f;
}

// ---------------------------------------------------------------------------
// evaluation

cd HalfLineFunction::eval(double x) const {
  if (x < 0.0) throw Error(Errc::domain, "eval_v: x must be >= 0");
  switch (kind_) {
    case FunctionKind::exp_decay:
      return std::sqrt(2.0 * a_) * std::exp(-a_ * x);
    case FunctionKind::band_bump: {
      const int panels = std::max(8, static_cast<int>((hi_ - lo_) * x / 3.0) + 1);
      auto f = [&](double t) -> cd { return sine_transform(t).real() * std::sin(t * x); };
      return (2.0 / pi) * integrate_gl(f, lo_, hi_, panels, 12);
    }
    case FunctionKind::sampled: {
      if (x >= sx_.back()) return 0.0;
      if (x <= sx_.front()) return sv_.front();
      const auto it = std::upper_bound(sx_.begin(), sx_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - sx_.begin()) - 1;
      const double t = (x - sx_[i]) / (sx_[i + 1] - sx_[i]);
      return sv_[i] * (1.0 - t) + sv_[i + 1] * t;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// transforms

cd HalfLineFunction::vtilde_sampled(cd mu) const {
  // Exact transform of the piecewise-linear interpolant.
  return fourier_linear_interp(sx_, sv_, mu);
}

cd HalfLineFunction::sine_transform(double t) const {
  if (t < 0.0) throw Error(Errc::domain, "sine_transform: t must be >= 0");
  switch (kind_) {
    case FunctionKind::exp_decay:
      return std::sqrt(2.0 * a_) * t / (a_ * a_ + t * t);
    case FunctionKind::band_bump: {
      if (t <= lo_ || t >= hi_) return 0.0;
      const double u = (2.0 * t - lo_ - hi_) / (hi_ - lo_);
      return amp_ * bump(u);
    }
    case FunctionKind::sampled:
      return (vtilde_sampled(cd(-t, 0.0)) - vtilde_sampled(cd(t, 0.0))) / (2.0 * iu);
  }
  return 0.0;
}

cd HalfLineFunction::cos_transform(double t) const {
  if (t < 0.0) throw Error(Errc::domain, "cos_transform: t must be >= 0");
  switch (kind_) {
    case FunctionKind::exp_decay:
      return std::sqrt(2.0 * a_) * a_ / (a_ * a_ + t * t);
    case FunctionKind::band_bump: {
      auto sh = [&](double nu) -> cd { return sine_transform(nu).real(); };
      if (t > lo_ && t < hi_) {
        const cd pvpart = pv_interval(sh, lo_, hi_, t, 1e-12);
        auto reg = [&](double nu) -> cd { return sh(nu) / (nu + t); };
        return (pvpart + adaptive_integrate(reg, lo_, hi_, 1e-12)) / pi;
      }
      auto full = [&](double nu) -> cd { return sh(nu) * nu / (nu * nu - t * t); };
      return (2.0 / pi) * adaptive_integrate(full, lo_, hi_, 1e-12);
    }
    case FunctionKind::sampled:
      return (vtilde_sampled(cd(t, 0.0)) + vtilde_sampled(cd(-t, 0.0))) / 2.0;
  }
  return 0.0;
}

cd HalfLineFunction::vtilde_real(double lam) const {
  const double t = std::abs(lam);
  const cd c = cos_transform(t);
  const cd s = sine_transform(t);
  return (lam >= 0.0) ? c - iu * s : c + iu * s;
}

cd HalfLineFunction::vtilde(cd mu) const {
  if (mu.imag() > 1e-14)
    throw Error(Errc::domain, "vtilde: argument must satisfy Im(mu) <= 0");
  if (mu.imag() == 0.0) return vtilde_real(mu.real());
  switch (kind_) {
    case FunctionKind::exp_decay:
      return std::sqrt(2.0 * a_) / (a_ + iu * mu);
    case FunctionKind::band_bump: {
      auto f = [&](double nu) -> cd {
        return sine_transform(nu).real() * nu / (nu * nu - mu * mu);
      };
      return (2.0 / pi) * adaptive_integrate(f, lo_, hi_, 1e-12);
    }
    case FunctionKind::sampled:
      return vtilde_sampled(mu);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// norms

double HalfLineFunction::l2_norm() const {
  switch (kind_) {
    case FunctionKind::exp_decay:
      return 1.0;
    case FunctionKind::band_bump: {
      auto f = [&](double t) -> cd {
        const cd s = sine_transform(t);
        return s.real() * s.real();
      };
      return std::sqrt((2.0 / pi) * adaptive_integrate(f, lo_, hi_, 1e-13).real());
    }
    case FunctionKind::sampled: {
      std::vector<double> terms;
      const auto& gl = GaussLegendre::order(6);
      for (std::size_t i = 0; i + 1 < sx_.size(); ++i) {
        const double h = sx_[i + 1] - sx_[i];
        for (std::size_t j = 0; j < gl.x.size(); ++j) {
          const double x = sx_[i] + 0.5 * h * (1.0 + gl.x[j]);
          terms.push_back(std::norm(eval(x)) * 0.5 * h * gl.w[j]);
        }
      }
      return std::sqrt(pairwise_sum(std::span<const double>(terms)));
    }
  }
  return 0.0;
}

double HalfLineFunction::weighted_moment() const {
  switch (kind_) {
    case FunctionKind::exp_decay:
      return 1.0 + 0.5 / (a_ * a_);
    case FunctionKind::band_bump: {
      // x v(x) has cosine transform shat', so int x^2 v^2 = (2/pi) ||shat'||^2.
      const double w = hi_ - lo_;
      auto f = [&](double t) -> cd {
        const double u = (2.0 * t - lo_ - hi_) / w;
        const double d = amp_ * bump_d1(u) * 2.0 / w;
        return d * d;
      };
      return 1.0 + (2.0 / pi) * adaptive_integrate(f, lo_, hi_, 1e-12).real();
    }
    case FunctionKind::sampled: {
      auto f = [&](double x) -> cd { return (1.0 + x * x) * std::norm(eval(x)); };
      return adaptive_integrate(f, 0.0, sx_.back(), 1e-12).real();
    }
  }
  return 0.0;
}

double HalfLineFunction::l1_norm() const {
  switch (kind_) {
    case FunctionKind::exp_decay:
      return std::sqrt(2.0 / a_);
    case FunctionKind::band_bump: {
      // integrate |v| out past the leading oscillations, then bound the tail
      const double X = 60.0 / (hi_ - lo_);
      auto f = [&](double x) -> cd { return std::abs(eval(x)); };
      double head = adaptive_integrate(f, 0.0, X, 1e-8).real();
      return head + decay_bound_ / X;
    }
    case FunctionKind::sampled: {
      auto f = [&](double x) -> cd { return std::abs(eval(x)); };
      return adaptive_integrate(f, 0.0, sx_.back(), 1e-10).real();
    }
  }
  return 0.0;
}

HalfLineFunction HalfLineFunction::normalized(double* factor) const {
  const double nrm = l2_norm();
  if (factor) *factor = nrm;
  if (!(nrm > 0.0)) throw Error(Errc::data, "normalized: zero function");
  HalfLineFunction out = *this;
  if (kind_ == FunctionKind::sampled) {
    for (cd& z : out.sv_) z /= nrm;
    out.decay_bound_ /= nrm;
  }
  // catalog forms are unit-norm by construction
  return out;
}

std::string HalfLineFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case FunctionKind::exp_decay: os << "exp_decay(a=" << a_ << ")"; break;
    case FunctionKind::band_bump: os << "band_bump(" << lo_ << "," << hi_ << ")"; break;
    case FunctionKind::sampled: os << "sampled[" << sx_.size() << " nodes]"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// potential

int SeparablePotential::negative_count() const {
  int c = 0;
  for (const auto& t : terms)
    if (t.alpha < 0.0) ++c;
  return c;
}

cd inner_product(const HalfLineFunction& vs, const HalfLineFunction& vk) {
  // Parseval route whenever either factor is band-limited.
  if (vs.is_band() || vk.is_band()) {
    double lo = 0.0, hi = 0.0;
    if (vs.is_band() && vk.is_band()) {
      lo = std::max(vs.band_lo(), vk.band_lo());
      hi = std::min(vs.band_hi(), vk.band_hi());
      if (!(hi > lo)) return 0.0;
    } else if (vs.is_band()) {
      lo = vs.band_lo();
      hi = vs.band_hi();
    } else {
      lo = vk.band_lo();
      hi = vk.band_hi();
    }
    auto f = [&](double t) -> cd {
      return std::conj(vs.sine_transform(t)) * vk.sine_transform(t);
    };
    return (2.0 / pi) * adaptive_integrate(f, lo, hi, 1e-12);
  }
  const double X = std::min(vs.x_max(), vk.x_max());
  auto f = [&](double x) -> cd { return std::conj(vs.eval(x)) * vk.eval(x); };
  return adaptive_integrate(f, 0.0, X, 1e-12);
}

void SeparablePotential::validate() const {
  if (terms.empty()) throw Error(Errc::data, "potential: no terms");
  for (const auto& t : terms) {
    if (t.alpha == 0.0) throw Error(Errc::data, "potential: coupling must be nonzero");
    const double nrm = t.v.l2_norm();
    if (std::abs(nrm - 1.0) > 1e-8)
      throw Error(Errc::data, "potential: " + t.v.describe() + " is not unit-norm (||v|| = " +
                                  std::to_string(nrm) + ")");
  }
  const int n = this->n();
  if (n > 1) {
    Eigen::MatrixXcd gram(n, n);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < n; ++k) gram(s, k) = inner_product(v(s), v(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.eigenvalues().minCoeff() <= 1e-10)
      throw Error(Errc::data, "potential: kernel functions are not linearly independent");
  }
}

}  // namespace scatter
