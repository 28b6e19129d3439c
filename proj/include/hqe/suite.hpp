#pragma once

// Property batteries over the whole pipeline. Each battery draws its own
// random instances from `seed` and returns one report; the same inputs give
// byte-identical reports regardless of the thread count.
//
//   identities  exact sigma_k identities, Newton, cone nesting, ellipticity
//   skm         rank-one sigma_k formula against the eigen-decomposition
//   xik         xi bounds: attainment, bracketing, chains, scaling, m range
//   psi         implicit vs ODE profile, l = 0 closed form, bounds
//   decay       fitted exponents of psi - 1 and mu_R
//   Phi-subsol  subsolution inequalities for random admissible matrices
//   sandwich    end-to-end sandwich on a ball with zero data

#include "hqe/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hqe {

struct SuiteOptions {
  std::size_t n = 0;       ///< restrict to one dimension; 0 = battery default range
  std::size_t trials = 0;  ///< 0 = battery default
  std::size_t samples = 0; ///< per-instance sample count where relevant; 0 = default
  std::uint64_t seed = 1;
  unsigned threads = 0;
  /// Test hook: perturbs the quantity under test for the first instance so
  /// the battery must report a violation.
  bool inject_fault = false;
};

[[nodiscard]] const std::vector<std::string>& battery_names();

/// Throws InvalidArgument for an unknown name.
VerificationReport run_battery(const std::string& name, const SuiteOptions& opts = {});

VerificationReport battery_identities(const SuiteOptions& opts);
VerificationReport battery_rank_one(const SuiteOptions& opts);
VerificationReport battery_xi(const SuiteOptions& opts);
VerificationReport battery_psi(const SuiteOptions& opts);
VerificationReport battery_decay(const SuiteOptions& opts);
VerificationReport battery_subsolution(const SuiteOptions& opts);
VerificationReport battery_sandwich(const SuiteOptions& opts);

}  // namespace hqe
