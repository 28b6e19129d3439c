#pragma once

// Shared numerical plumbing: bracketed scalar roots, Gauss-Legendre panels,
// least-squares lines, a portable RNG and a chunked parallel loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace hqe {

struct RootOptions {
  double x_tol = 0.0;             ///< stop once the bracket is this narrow (0: machine precision)
  double secant_switch = 1e-3;    ///< bracket width below which secant steps are tried
  int max_iterations = 400;
};

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Root of a continuous f on [lo, hi] with f(lo) <= 0 <= f(hi) (or the
/// reverse). Bisects until the bracket is narrower than `secant_switch`,
/// then takes secant steps that are kept only when they stay inside the
/// current bracket. Throws InvalidArgument if the endpoints do not bracket.
RootResult bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                          const RootOptions& opts = {});

/// Integral over [a, b] split into `panels` equal pieces, 20-point
/// Gauss-Legendre on each.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log(y) against log(x).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// mt19937_64 with hand-rolled uniform/normal transforms so that sample
/// streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();                      ///< [0, 1)
  double uniform(double lo, double hi);  ///< [lo, hi)
  double normal();
  std::int64_t integer(std::int64_t lo, std::int64_t hi);  ///< inclusive
  std::vector<double> unit_vector(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Points on the unit sphere S^{n-1}: the 2n signed coordinate axes first,
/// then pseudo-random directions from `seed` up to `count` total.
std::vector<std::vector<double>> sphere_directions(std::size_t n, std::size_t count, std::uint64_t seed);

/// Deterministic, roughly uniform unit vectors: equal angles for n = 2, a
/// Fibonacci lattice for n = 3, the 2n signed axes followed by seeded random
/// directions otherwise.
std::vector<std::vector<double>> quasi_uniform_directions(std::size_t n, std::size_t count, std::uint64_t seed);

/// Number of worker threads used by parallel_for when 0 is requested.
unsigned default_threads();

/// Calls body(begin, end) over disjoint contiguous chunks of [0, count).
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hqe
