#include "hqe/numerics.hpp"

#include "hqe/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace hqe {

RootResult bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                          const RootOptions& opts) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, flo, 0};
  if (fhi == 0.0) return {hi, fhi, 0};
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "root is not bracketed");
  }
  const bool increasing = flo < 0.0;
  RootResult best = std::abs(flo) < std::abs(fhi) ? RootResult{lo, flo, 0} : RootResult{hi, fhi, 0};

  // Evaluates f at x, records it, and shrinks the bracket. Returns true on
  // an exact zero.
  auto probe = [&](double x) {
    const double fx = f(x);
    if (std::abs(fx) < std::abs(best.fx)) {
      best.x = x;
      best.fx = fx;
    }
    if (fx == 0.0) return true;
    if ((fx < 0.0) == increasing) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    return false;
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    best.iterations = it;
    const double width = hi - lo;
    const double floor = std::max(opts.x_tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max(std::abs(lo), std::abs(hi)));
    if (width <= floor) break;

    bool secant = false;
    double x = 0.5 * (lo + hi);
    if (width < opts.secant_switch * std::max(1.0, std::abs(hi))) {
      const double s = hi - fhi * (hi - lo) / (fhi - flo);
      if (std::isfinite(s) && s > lo + 0.01 * width && s < hi - 0.01 * width) {
        x = s;
        secant = true;
      }
    }
    if (probe(x)) return best;
    // A secant step that removed less than half of the bracket is followed
    // by a bisection, so the bracket at least halves every iteration.
    if (secant && (hi - lo) > 0.5 * width) {
      if (probe(0.5 * (lo + hi))) return best;
    }
  }
  return best;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels < 1) panels = 1;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + h * p;
    const double hi = (p + 1 == panels) ? b : lo + h;
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
  }
  return total;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::InvalidArgument, "line fit needs >= 2 paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  return fit_line(lx, ly);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::integer(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

std::vector<double> Rng::unit_vector(std::size_t n) {
  std::vector<double> v(n);
  double norm = 0.0;
  while (norm < 1e-8) {
    norm = 0.0;
    for (double& x : v) {
      x = normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> sphere_directions(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  dirs.reserve(std::max(count, 2 * n));
  for (std::size_t i = 0; i < n && dirs.size() < count; ++i) {
    for (double sgn : {1.0, -1.0}) {
      if (dirs.size() == count) break;
      std::vector<double> e(n, 0.0);
      e[i] = sgn;
      dirs.push_back(std::move(e));
    }
  }
  Rng rng(seed);
  while (dirs.size() < count) dirs.push_back(rng.unit_vector(n));
  return dirs;
}

std::vector<std::vector<double>> quasi_uniform_directions(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  dirs.reserve(count);
  if (n == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * static_cast<double>(i);
      dirs.push_back({rho * std::cos(th), rho * std::sin(th), z});
    }
  } else {
    dirs = sphere_directions(n, count, seed);
  }
  return dirs;
}

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(count, t * chunk);
      const std::size_t end = std::min(count, begin + chunk);
      pool.emplace_back([&, t, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hqe
