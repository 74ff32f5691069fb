#include "scatter/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace scatter {

namespace {

template <class T>
T pairwise_impl(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) s += v[i];
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_impl(v.first(half)) + pairwise_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_impl(v); }
cd pairwise_sum(std::span<const cd> v) { return pairwise_impl(v); }

const GaussLegendre& GaussLegendre::order(int n) {
  static std::mutex mtx;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Newton iteration on Legendre polynomials.
  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    gl.x[i] = -z;
    gl.x[n - 1 - i] = z;
    gl.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    gl.w[n - 1 - i] = gl.w[i];
  }
  return cache.emplace(n, std::move(gl)).first->second;
}

void PanelRule::append(double a, double b, int panels, int order) {
  if (!(b > a) || panels < 1) return;
  const auto& gl = GaussLegendre::order(order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      x.push_back(c + 0.5 * h * gl.x[j]);
      w.push_back(0.5 * h * gl.w[j]);
    }
  }
}

std::vector<double> sample_quad_weights(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;

  bool uniform = true;
  const double h = x[1] - x[0];
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (std::abs((x[i + 1] - x[i]) - h) > 1e-12 * std::max(1.0, std::abs(h))) {
      uniform = false;
      break;
    }

  if (uniform && n >= 3) {
    // Composite Simpson; trailing trapezoid panel when the count is even.
    std::size_t last = (n % 2 == 1) ? n - 1 : n - 3;
    for (std::size_t i = 0; i + 2 <= last; i += 2) {
      w[i] += h / 3.0;
      w[i + 1] += 4.0 * h / 3.0;
      w[i + 2] += h / 3.0;
    }
    if (n % 2 == 0) {
      if (n >= 4) {
        // the Simpson sweep stops at index n-4; 3/8 rule covers the rest
        w[n - 4] += 3.0 * h / 8.0;
        w[n - 3] += 9.0 * h / 8.0;
        w[n - 2] += 9.0 * h / 8.0;
        w[n - 1] += 3.0 * h / 8.0;
      } else {
        w[0] = w[1] = h / 2.0;
      }
    }
    return w;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hi = x[i + 1] - x[i];
    w[i] += 0.5 * hi;
    w[i + 1] += 0.5 * hi;
  }
  return w;
}

double sinc_lam(double lam, double u) {
  const double t = lam * u;
  if (std::abs(t) < 1e-6) {
    // sin(t)/lam = u*(1 - t^2/6 + t^4/120)
    return u * (1.0 - t * t / 6.0 * (1.0 - t * t / 20.0));
  }
  return std::sin(t) / lam;
}

cd fourier_linear_interp(std::span<const double> x, std::span<const cd> v, cd mu) {
  const cd q = -iu * mu;
  std::vector<cd> terms;
  terms.reserve(x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    const cd A = v[i];
    const cd B = (v[i + 1] - v[i]) / h;
    const cd qh = q * h;
    cd J0, J1;
    if (std::abs(qh) < 1e-4) {
      J0 = h * (1.0 + qh * (0.5 + qh * (1.0 / 6.0 + qh / 24.0)));
      J1 = h * h * (0.5 + qh * (1.0 / 3.0 + qh * (0.125 + qh / 30.0)));
    } else {
      const cd e = std::exp(qh);
      J0 = (e - 1.0) / q;
      J1 = (h * e) / q - (e - 1.0) / (q * q);
    }
    terms.push_back(std::exp(q * x[i]) * (A * J0 + B * J1));
  }
  return pairwise_sum(std::span<const cd>(terms));
}

int thread_count() {
  static int n = [] {
    if (const char* env = std::getenv("SCATTER_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return std::min(v, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
  }();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int nt = thread_count();
  if (nt <= 1 || n < 32) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([=, &body] {
      for (std::size_t i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace scatter
