#include "hqe/report.hpp"

#include <algorithm>
#include <limits>

namespace hqe {

void VerificationReport::observe(const std::string& check, double margin) {
  auto [it, inserted] = worst.try_emplace(check, margin);
  if (!inserted && margin < it->second) it->second = margin;
}

void VerificationReport::add_violation(Violation v) {
  ++violation_count;
  auto pos = std::upper_bound(violations.begin(), violations.end(), v.index,
                              [](std::size_t i, const Violation& w) { return i < w.index; });
  violations.insert(pos, std::move(v));
  if (violations.size() > kKeptViolations) violations.pop_back();
}

void VerificationReport::merge(const VerificationReport& other) {
  samples += other.samples;
  for (const auto& [check, margin] : other.worst) observe(check, margin);
  const std::size_t before = violation_count;
  for (const auto& v : other.violations) add_violation(v);
  violation_count = before + other.violation_count;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json out;
  out["name"] = name;
  out["samples"] = samples;
  out["passed"] = passed();
  out["violation_count"] = violation_count;
  nlohmann::json w = nlohmann::json::object();
  for (const auto& [check, margin] : worst) w[check] = margin;
  out["worst_margins"] = w;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : violations) {
    list.push_back({{"index", v.index}, {"check", v.check}, {"value", v.value}, {"point", v.point}});
  }
  out["violations"] = list;
  out["parameters"] = parameters;
  return out;
}

}  // namespace hqe
