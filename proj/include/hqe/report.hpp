#pragma once

// Pass/fail bookkeeping shared by every numerical verification. Reports from
// disjoint sample ranges merge associatively, and the merged result does not
// depend on how the samples were split across threads.

#include "json.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hqe {

struct Violation {
  std::size_t index = 0;  ///< sample index, used for deterministic ordering
  std::string check;
  double value = 0.0;
  std::vector<double> point;
};

struct VerificationReport {
  static constexpr std::size_t kKeptViolations = 20;

  std::string name;
  std::size_t samples = 0;
  std::size_t violation_count = 0;
  std::map<std::string, double> worst;  ///< smallest margin seen per check
  std::vector<Violation> violations;    ///< first kKeptViolations by index
  nlohmann::json parameters = nlohmann::json::object();

  [[nodiscard]] bool passed() const noexcept { return violation_count == 0; }

  /// Lowers worst[check] to `margin` if smaller.
  void observe(const std::string& check, double margin);
  void add_violation(Violation v);
  void merge(const VerificationReport& other);

  [[nodiscard]] nlohmann::json to_json() const;
};

}  // namespace hqe
