// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "hqe/suite.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(const std::string& args) {
  const std::string err_file = fs::temp_directory_path() / "hqe_acceptance_stderr.txt";
  const std::string cmd = std::string(HQE_CLI) + " " + args + " 2>" + err_file;
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err_file);
  std::stringstream ss;
  ss << e.rdbuf();
  r.err = ss.str();
  return r;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << "  " << title << "  " << detail << std::endl;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::string problem(const std::string& name) { return std::string(HQE_PROBLEMS) + "/" + name; }

void worked_examples() {
  using Table = std::map<std::string, std::string>;
  struct Case {
    std::string a;
    Table upper, lower, m;
  };
  const std::vector<Case> cases{
      {"1,2,3", {{"2", "9/11"}}, {{"2", "5/11"}},
       {{"3,1", "12/5"}, {"2,1", "66/43"}, {"2,0", "22/9"}, {"1,0", "2"}}},
      {"11,12,13", {{"2", "299/431"}}, {{"2", "275/431"}},
       {{"3,2", "431/156"}, {"3,1", "72/25"}, {"2,1", "15516/6023"}, {"2,0", "862/299"}, {"1,0", "36/13"}}},
  };
  bool ok = true;
  double worst_time = 0.0;
  std::string missed;
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    const Run r = run_cli("xi --a " + c.a + " --exact --json");
    worst_time = std::max(worst_time, seconds_since(t0));
    if (r.code != 0) {
      ok = false;
      missed += " exit(" + c.a + ")=" + std::to_string(r.code);
      continue;
    }
    const auto doc = nlohmann::json::parse(r.out);
    Table up, lo, m;
    for (const auto& x : doc["xi"]) {
      up[std::to_string(x["j"].get<int>())] = x["upper"];
      lo[std::to_string(x["j"].get<int>())] = x["lower"];
    }
    for (const auto& x : doc["m"]) m[std::to_string(x["k"].get<int>()) + "," + std::to_string(x["l"].get<int>())] = x["m"];
    auto compare = [&](const Table& want, const Table& got, const std::string& what) {
      for (const auto& [key, value] : want) {
        if (!got.contains(key) || got.at(key) != value) {
          ok = false;
          missed += " " + what + "(" + key + ")@" + c.a;
        }
      }
    };
    compare(c.upper, up, "xi_upper");
    compare(c.lower, lo, "xi_lower");
    compare(c.m, m, "m");
  }
  ok = ok && worst_time < 1.0;
  report(1, "worked-example rationals", ok,
         "13 exact values, max runtime " + num(worst_time) + " s (limit 1 s)" + (missed.empty() ? "" : ", mismatched:" + missed));
}

void battery(int id, const std::string& title, const std::string& name, double limit_s, hqe::SuiteOptions opts,
             const std::string& what) {
  const auto t0 = Clock::now();
  const hqe::VerificationReport rep = hqe::run_battery(name, opts);
  const double t = seconds_since(t0);
  std::string detail = what + ": " + std::to_string(rep.samples) + " instances, " +
                       std::to_string(rep.violation_count) + " violations, " + num(t) + " s";
  if (limit_s > 0) detail += " (limit " + num(limit_s) + " s)";
  if (!rep.passed()) detail += ", first: " + rep.violations.front().check;
  report(id, title, rep.passed() && (limit_s <= 0 || t < limit_s), detail);
}

void end_to_end() {
  const std::vector<std::string> files{"ball_k2_l0.json", "ball_k3_l0.json", "ball_k3_l1.json"};
  const fs::path dir = fs::temp_directory_path() / "hqe_acceptance";
  bool ok = true;
  std::string detail;
  for (const auto& f : files) {
    const auto t0 = Clock::now();
    const Run r = run_cli("solve " + problem(f) + " --out " + (dir / f).string());
    const double t = seconds_since(t0);
    bool this_ok = r.code == 0 && t < 300.0;
    std::string d = f + ": exit " + std::to_string(r.code) + ", " + num(t) + " s";
    if (r.code == 0 || r.code == 4) {
      const auto s = nlohmann::json::parse(r.out);
      const auto& w = s["worst"];
      const double bv = w.value("boundary_value", -1.0);
      const double order = w.value("ordering", -1.0);
      const double pinch = w.value("pinching_identity", -1.0);
      const double rel = s["slope_relative_error"];
      this_ok = this_ok && bv >= -1e-10 && order >= 0.0 && pinch >= -1e-10 && rel <= 0.01 &&
                s["violations"].get<std::size_t>() == 0;
      d += ", boundary " + num(bv) + ", ordering margin " + num(order) + ", identity " + num(pinch) +
           ", slope " + num(s["decay_slope"].get<double>()) + " rel err " + num(rel);
    }
    ok = ok && this_ok;
    detail += (detail.empty() ? "" : "; ") + d;
  }
  report(7, "end-to-end sandwich", ok, detail + " (tol 1e-10, slope 1%, limit 300 s each)");
}

void gates() {
  const Run small = run_cli("solve " + problem("ball_k2_l0_c_too_small.json"));
  const Run rejected = run_cli("solve " + problem("rejected_k2_l1.json"));
  const bool ok = small.code == 3 && rejected.code == 2 && rejected.err.find("m > 2") != std::string::npos;
  report(8, "hypothesis gates", ok,
         "c < c_tilde exit " + std::to_string(small.code) + " (want 3), m_{2,1} = 66/43 problem exit " +
             std::to_string(rejected.code) + " (want 2), message cites m > 2: " +
             (rejected.err.find("m > 2") != std::string::npos ? "yes" : "no"));
}

}  // namespace

int main() {
  worked_examples();
  battery(2, "identity suite", "identities", 30.0, {.trials = 10000, .seed = 1}, "n in 3..8, exact");
  battery(3, "rank-one sigma_k", "skm", 10.0, {.trials = 1000, .seed = 1}, "n in 1..6, rel 1e-10");
  battery(4, "psi implicit vs ODE", "psi", 60.0, {.trials = 50, .seed = 1}, "abs 1e-8, closed form 1e-12");
  battery(5, "asymptotic exponents", "decay", 0.0, {.seed = 1}, "psi slope 0.5%, mu slope 1%");
  battery(6, "subsolution", "Phi-subsol", 300.0, {.trials = 20, .samples = 10000, .seed = 1},
          "n in 3..5, all (k,l), 20 matrices x 1e4 samples, tol 1e-12");
  end_to_end();
  gates();
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
