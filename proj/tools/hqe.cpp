// hqe: command-line front end for the exterior Hessian quotient pipeline.
//
// Exit status: 0 success, 1 usage or input error, 2 hypothesis not met
// (spectrum outside the cone, m <= 2, A not admissible), 3 c below c_tilde,
// 4 a verification check failed.

#include "hqe/admissibility.hpp"
#include "hqe/boundary.hpp"
#include "hqe/error.hpp"
#include "hqe/exterior.hpp"
#include "hqe/numerics.hpp"
#include "hqe/profile.hpp"
#include "hqe/rational.hpp"
#include "hqe/subsolution.hpp"
#include "hqe/suite.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace hqe;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kHypothesis = 2;
constexpr int kCTooSmall = 3;
constexpr int kVerification = 4;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorCode::ParseError, "empty entry in list '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty list");
  return out;
}

std::vector<Rational> rational_list(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& s : split_list(text)) out.push_back(parse_rational(s));
  return out;
}

std::vector<double> double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) v = to_double(parse_rational(s));
    out.push_back(v);
  }
  return out;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\r\n") != std::string::npos) {
      row += '"';
      for (char ch : c) row += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      row += '"';
    } else {
      row += c;
    }
  }
  return row + "\r\n";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotInCone:
    case ErrorCode::NotPositiveCone:
    case ErrorCode::NotAdmissible:
      return kHypothesis;
    case ErrorCode::CTooSmall:
      return kCTooSmall;
    case ErrorCode::HypothesisViolated:
      return kVerification;
    default:
      return kInputError;
  }
}

struct Output {
  std::string dir;

  void write(const std::string& name, const std::string& content) const {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + name + " in " + dir);
    f << content;
  }
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------------ xi

struct XiArgs {
  std::string a;
  std::optional<int> k;
  std::optional<int> l;
  bool exact = false;
  bool json = false;
};

template <class T>
int run_xi(const XiArgs& args, const std::vector<T>& a, const std::vector<std::string>& shown, const Output& out) {
  const int n = static_cast<int>(a.size());
  if (!in_gamma_plus(a)) {
    throw Error(ErrorCode::NotPositiveCone, "a = (" + args.a + ") is not in the positive cone Gamma^+");
  }
  auto str = [](const T& v) {
    if constexpr (is_exact_v<T>) {
      return to_string(v);
    } else {
      return fmt(v);
    }
  };
  nlohmann::json j;
  j["a"] = shown;
  j["arithmetic"] = args.exact ? "exact" : "double";
  std::string table = "a = (" + args.a + ")\r\n" + csv_row({"j", "xi_upper", "xi_lower"});
  for (int q = 0; q <= n; ++q) {
    const auto b = xi_bounds(q, a);
    table += csv_row({std::to_string(q), str(b.upper), str(b.lower)});
    j["xi"].push_back({{"j", q}, {"upper", str(b.upper)}, {"lower", str(b.lower)}});
  }
  table += csv_row({"k", "l", "m", "m_gt_2"});
  for (int k = 1; k <= n; ++k) {
    if (args.k && *args.k != k) continue;
    for (int l = 0; l < k; ++l) {
      if (args.l && *args.l != l) continue;
      const T m = m_exponent(k, l, a);
      const bool big = m > T(2);
      table += csv_row({std::to_string(k), std::to_string(l), str(m), big ? "true" : "false"});
      j["m"].push_back({{"k", k}, {"l", l}, {"m", str(m)}, {"m_gt_2", big}});
    }
  }
  if (!j.contains("m")) throw Error(ErrorCode::InvalidArgument, "no (k, l) with 0 <= l < k <= n matches the request");
  std::cout << (args.json ? dump(j) : table);
  out.write("xi.csv", table);
  out.write("xi.json", dump(j));
  return kOk;
}

int cmd_xi(const XiArgs& args, const Output& out) {
  const auto q = rational_list(args.a);
  std::vector<std::string> shown;
  for (const auto& v : q) shown.push_back(to_string(v));
  if (args.exact) return run_xi<Rational>(args, q, shown, out);
  return run_xi<double>(args, double_list(args.a), shown, out);
}

// ------------------------------------------------------------ psi and mu

struct ProfileArgs {
  int k = 0;
  int l = 0;
  std::string a;
  std::optional<double> xi_upper;
  std::optional<double> xi_lower;
  double beta = 2.0;
  std::string r;
  double r_min = 1.0;
  double r_max = 1e3;
  int points = 31;
  bool require_admissible = false;
};

ProfileSpec spec_from(const ProfileArgs& args) {
  if (!args.a.empty()) {
    const auto a = double_list(args.a);
    if (!in_gamma_plus(a)) throw Error(ErrorCode::NotPositiveCone, "a is not in the positive cone Gamma^+");
    return ProfileSpec::from_spectrum(args.k, args.l, a, args.beta);
  }
  if (!args.xi_upper) throw Error(ErrorCode::InvalidArgument, "give --a or --xi-upper (and --xi-lower when l > 0)");
  return ProfileSpec::from_xi(args.k, args.l, *args.xi_upper, args.xi_lower.value_or(0.0), args.beta);
}

std::vector<double> grid_from(const ProfileArgs& args) {
  if (!args.r.empty()) return double_list(args.r);
  if (!(args.r_min >= 1.0) || !(args.r_max >= args.r_min) || args.points < 1) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= r-min <= r-max and points >= 1");
  }
  std::vector<double> r;
  for (int i = 0; i < args.points; ++i) {
    const double t = args.points == 1 ? 0.0 : static_cast<double>(i) / (args.points - 1);
    r.push_back(args.r_min * std::pow(args.r_max / args.r_min, t));
  }
  return r;
}

void require_m(const ProfileSpec& spec, bool required) {
  if (required && !(spec.m > 2.0)) {
    throw Error(ErrorCode::NotAdmissible, "m_{" + std::to_string(spec.k) + "," + std::to_string(spec.l) +
                                              "} = " + fmt(spec.m) + " but the construction requires m > 2");
  }
}

int cmd_psi(const ProfileArgs& args, const Output& out) {
  const ProfileSpec spec = spec_from(args);
  require_m(spec, args.require_admissible);
  auto r = grid_from(args);
  std::sort(r.begin(), r.end());
  for (double v : r) {
    if (!(v >= 1.0)) throw Error(ErrorCode::InvalidArgument, "r must be >= 1");
  }
  const auto path = solve_ode_excess_path(spec, r);
  const double cst = asymptotic_constant(spec);
  std::string csv = csv_row({"r", "psi_implicit", "psi_ode", "abs_diff", "scaled_excess", "B_over_order", "bounds_ok"});
  int bad = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double implicit = solve_implicit(spec, r[i]);
    const double excess = solve_implicit_excess(spec, r[i]);
    const double scaled = excess * std::pow(r[i], spec.m);
    const bool ok = implicit >= 1.0 && implicit <= spec.beta && scaled >= (spec.beta - 1.0) * (1.0 - 1e-12) &&
                    scaled <= cst * (1.0 + 1e-12);
    if (!ok) {
      ++bad;
      std::cerr << "bound violated at r = " << fmt(r[i]) << ": (psi - 1) r^m = " << fmt(scaled) << "\n";
    }
    csv += csv_row({fmt(r[i]), fmt(implicit), fmt(1.0 + path[i]), fmt(std::abs(1.0 + path[i] - implicit)),
                    fmt(scaled), fmt(cst), ok ? "true" : "false"});
  }
  std::cout << csv;
  out.write("psi.csv", csv);
  return bad == 0 ? kOk : kVerification;
}

int cmd_mu(const ProfileArgs& args, const Output& out) {
  const ProfileSpec spec = spec_from(args);
  require_m(spec, true);
  const auto R = grid_from(args);
  const double lead = asymptotic_constant(spec) / (spec.m - 2.0);
  std::string csv = csv_row({"R", "mu_R", "leading_term", "ratio"});
  for (double v : R) {
    const double m = mu(v, spec);
    const double l = lead * std::pow(v, 2.0 - spec.m);
    csv += csv_row({fmt(v), fmt(m), fmt(l), l > 0.0 ? fmt(m / l) : "nan"});
  }
  std::cout << csv;
  out.write("mu.csv", csv);
  return kOk;
}

// ------------------------------------------------------------ subsolution

struct SubArgs {
  int k = 0;
  int l = 0;
  std::string a;
  std::string matrix;
  bool normalize = false;
  double alpha = 0.0;
  double beta = 2.0;
  double gamma = 1.0;
  std::size_t samples = 10000;
  double r_max = 1e3;
  bool exact_ellipsoid = false;
};

int cmd_subsolution(const SubArgs& args, std::uint64_t seed, unsigned threads, const Output& out) {
  SymMatrix A;
  if (!args.matrix.empty()) {
    const auto rows = nlohmann::json::parse(args.matrix).get<std::vector<std::vector<double>>>();
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.size()) throw Error(ErrorCode::ParseError, "matrix must be square");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    A = SymMatrix::symmetrized(DenseMatrix(rows.size(), flat));
  } else if (!args.a.empty()) {
    A = SymMatrix::diagonal(double_list(args.a));
  } else {
    throw Error(ErrorCode::InvalidArgument, "give --a or --matrix");
  }
  if (args.normalize) {
    const auto eig = eigh(A);
    if (!in_gamma_plus(eig.values.entries())) throw Error(ErrorCode::NotPositiveCone, "lambda(A) is not positive");
    const double rho = normalizing_factor(args.k, args.l, eig.values.entries());
    SymMatrix scaled(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) {
      for (std::size_t j = i; j < A.size(); ++j) scaled.set(i, j, rho * A(i, j));
    }
    A = scaled;
  }
  const Subsolution sub(A, args.k, args.l, args.alpha, args.beta, args.gamma);
  const auto pts = subsolution_samples(sub, args.samples, seed, args.r_max);
  const VerificationReport rep =
      args.exact_ellipsoid
          ? verify_exact_ellipsoid_solution(A, args.k, args.l, args.gamma, args.alpha, args.beta, pts, threads)
          : verify_subsolution(sub, pts, threads);
  nlohmann::json j = rep.to_json();
  j["offset"] = sub.offset();
  j["mu_gamma"] = sub.mu_gamma();
  std::cout << dump(j);
  out.write("subsolution.json", dump(j));
  return rep.passed() ? kOk : kVerification;
}

// ------------------------------------------------------------ boundary and solve

struct ProblemArgs {
  std::string problem;
  std::size_t mesh = 400;
  std::size_t samples = 100000;
  std::size_t directions = 2000;
  double r_max = 1e3;
};

ExteriorProblem load_problem(const ProblemArgs& args) {
  ExteriorProblem p = ExteriorProblem::load(args.problem);
  for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
  return p;
}

int cmd_boundary(const ProblemArgs& args, unsigned threads, const Output& out) {
  const ExteriorProblem p = load_problem(args);
  const Reduction red = reduce_to_diagonal(p, args.mesh);
  const Envelope env = build_envelope(red, {.mesh_size = args.mesh, .touching = {}, .threads = threads});
  nlohmann::json j{{"reduction", red.to_json()}, {"constants", env.constants().to_json()},
                   {"boundary_defect", env.boundary_defect()}, {"warnings", p.warnings}};
  nlohmann::json quads = nlohmann::json::array();
  for (const auto& q : env.quadratics()) {
    quads.push_back({{"xi", q.xi}, {"x_bar", q.x_bar}, {"t", q.t}, {"margin", q.margin}});
  }
  std::cout << dump(j);
  out.write("boundary.json", dump(j));
  out.write("touching.json", dump(quads));
  return kOk;
}

std::string decay_dat(const DecayReport& d) {
  std::string s = "# r w r^(m-2)*w\n";
  for (std::size_t i = 0; i < d.radii.size(); ++i) s += fmt(d.radii[i]) + " " + fmt(d.w[i]) + " " + fmt(d.scaled[i]) + "\n";
  return s;
}

int cmd_solve(const ProblemArgs& args, std::uint64_t seed, unsigned threads, const Output& out) {
  const ExteriorProblem p = load_problem(args);
  const Reduction red = reduce_to_diagonal(p, args.mesh);
  Envelope env = build_envelope(red, {.mesh_size = args.mesh, .touching = {}, .threads = threads});
  const EnvelopeConstants constants = env.constants();
  if (red.reduced.c < constants.c_tilde) {
    // Thresholds are reported in the frame of the input problem.
    const double c_tilde_original = red.original_c(constants.c_tilde);
    nlohmann::json j{{"status", "c_too_small"}, {"c", p.c}, {"c_tilde", c_tilde_original},
                     {"reduced_c", red.reduced.c}, {"reduced_c_tilde", constants.c_tilde}};
    std::cerr << "c = " << fmt(p.c) << " is below c_tilde = " << fmt(c_tilde_original) << "\n";
    std::cout << dump(j);
    out.write("solve.json", dump(j));
    return kCTooSmall;
  }
  const Sandwich s(red, std::move(env));
  SandwichCheckOptions co;
  co.samples = args.samples;
  co.seed = seed;
  co.r_max = args.r_max;
  co.threads = threads;
  const VerificationReport rep = verify_sandwich(s, co);
  const DecayReport decay = decay_report(s, args.directions, threads);
  const bool ok = rep.passed() && decay.slope_ok;
  nlohmann::json summary{{"status", ok ? "ok" : "violations"},
                         {"k", p.k},
                         {"l", p.l},
                         {"n", p.dim()},
                         {"m", s.m()},
                         {"c", p.c},
                         {"c_tilde", red.original_c(constants.c_tilde)},
                         {"beta_c", s.beta_c()},
                         {"beta_hat", constants.beta_hat},
                         {"samples", rep.samples},
                         {"violations", rep.violation_count},
                         {"worst", rep.worst},
                         {"decay_slope", decay.slope},
                         {"expected_slope", decay.expected_slope},
                         {"slope_relative_error", decay.relative_error},
                         {"slope_ok", decay.slope_ok},
                         {"limsup_estimate", decay.limsup_estimate},
                         {"predicted_constant", decay.predicted_constant},
                         {"warnings", p.warnings}};
  std::cout << dump(summary);
  out.write("solve.json", dump(summary));
  out.write("sandwich.json", dump(s.to_json()));
  out.write("verification.json", dump(rep.to_json()));
  out.write("decay.json", dump(decay.to_json()));
  out.write("decay.csv", decay.to_csv());
  out.write("decay.dat", decay_dat(decay));
  if (!ok) {
    for (const auto& v : rep.violations) std::cerr << "violation: " << v.check << " value " << fmt(v.value) << "\n";
    if (!decay.slope_ok) std::cerr << "decay slope " << fmt(decay.slope) << " misses " << fmt(decay.expected_slope) << "\n";
  }
  return ok ? kOk : kVerification;
}

// ------------------------------------------------------------ verify

struct VerifyArgs {
  std::string lemma = "all";
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t samples = 0;
  bool inject_fault = false;
};

int cmd_verify(const VerifyArgs& args, std::uint64_t seed, unsigned threads, const Output& out) {
  std::vector<std::string> names;
  if (args.lemma == "all") {
    names = battery_names();
  } else {
    names = split_list(args.lemma);
  }
  SuiteOptions o;
  o.n = args.n;
  o.trials = args.trials;
  o.samples = args.samples;
  o.seed = seed;
  o.threads = threads;
  o.inject_fault = args.inject_fault;
  bool all = true;
  nlohmann::json reports = nlohmann::json::array();
  std::string table = csv_row({"lemma", "instances", "violations", "status"});
  for (const auto& name : names) {
    const VerificationReport rep = run_battery(name, o);
    all = all && rep.passed();
    table += csv_row({name, std::to_string(rep.samples), std::to_string(rep.violation_count),
                      rep.passed() ? "PASS" : "FAIL"});
    if (!rep.passed()) {
      const Violation& v = rep.violations.front();
      std::string point;
      for (double x : v.point) point += (point.empty() ? "" : " ") + fmt(x);
      std::cerr << name << ": " << v.check << " failed, value " << fmt(v.value) << ", witness (" << point << ")\n";
    }
    reports.push_back(rep.to_json());
  }
  std::cout << table;
  out.write("verify.csv", table);
  out.write("verify.json", dump(reports));
  return all ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exterior Dirichlet problem for Hessian quotient equations"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  std::uint64_t seed = 1;
  Output out;
  app.add_option("--threads", threads, "worker threads (0 = available parallelism)");
  app.add_option("--seed", seed, "seed for sampling");
  app.add_option("--out", out.dir, "directory for CSV/JSON/.dat outputs");

  XiArgs xi;
  auto* xi_cmd = app.add_subcommand("xi", "xi bounds and m_{k,l} for a spectrum");
  xi_cmd->add_option("--a", xi.a, "comma-separated entries (integers, p/q or decimals)")->required();
  xi_cmd->add_option("--k", xi.k);
  xi_cmd->add_option("--l", xi.l);
  xi_cmd->add_flag("--exact", xi.exact, "rational arithmetic");
  xi_cmd->add_flag("--json", xi.json, "print JSON instead of the table");

  ProfileArgs prof;
  auto add_profile = [&](CLI::App* c) {
    c->add_option("--k", prof.k)->required();
    c->add_option("--l", prof.l)->required();
    c->add_option("--a", prof.a, "spectrum");
    c->add_option("--xi-upper", prof.xi_upper);
    c->add_option("--xi-lower", prof.xi_lower);
    c->add_option("--beta", prof.beta);
    c->add_option("--r", prof.r, "comma-separated radii");
    c->add_option("--r-min", prof.r_min);
    c->add_option("--r-max", prof.r_max);
    c->add_option("--points", prof.points);
  };
  auto* psi_cmd = app.add_subcommand("psi", "profile psi(r, beta) by both methods, as CSV");
  add_profile(psi_cmd);
  psi_cmd->add_flag("--require-admissible", prof.require_admissible, "fail with exit 2 unless m > 2");
  auto* mu_cmd = app.add_subcommand("mu", "tail integral mu_R(beta), as CSV");
  add_profile(mu_cmd);

  SubArgs sub;
  auto* sub_cmd = app.add_subcommand("subsolution", "verify the subsolution inequalities for one A");
  sub_cmd->add_option("--k", sub.k)->required();
  sub_cmd->add_option("--l", sub.l)->required();
  sub_cmd->add_option("--a", sub.a, "diagonal of A");
  sub_cmd->add_option("--matrix", sub.matrix, "A as a JSON array of rows");
  sub_cmd->add_flag("--normalize", sub.normalize, "rescale A so that sigma_k = sigma_l");
  sub_cmd->add_option("--alpha", sub.alpha);
  sub_cmd->add_option("--beta", sub.beta);
  sub_cmd->add_option("--gamma", sub.gamma);
  sub_cmd->add_option("--samples", sub.samples);
  sub_cmd->add_option("--r-max", sub.r_max);
  sub_cmd->add_flag("--exact-ellipsoid", sub.exact_ellipsoid, "also check Phi as the exact solution outside E_gamma");

  ProblemArgs prob;
  auto* bnd_cmd = app.add_subcommand("boundary", "touching quadratics and envelope constants of a problem");
  bnd_cmd->add_option("problem", prob.problem, "problem JSON file")->required();
  bnd_cmd->add_option("--mesh", prob.mesh);
  auto* solve_cmd = app.add_subcommand("solve", "build and verify the sandwich for a problem");
  solve_cmd->add_option("problem", prob.problem, "problem JSON file")->required();
  solve_cmd->add_option("--mesh", prob.mesh);
  solve_cmd->add_option("--samples", prob.samples);
  solve_cmd->add_option("--directions", prob.directions);
  solve_cmd->add_option("--r-max", prob.r_max);

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "run the property batteries");
  ver_cmd->add_option("--lemma", ver.lemma, "all, or a comma-separated subset of the battery names");
  ver_cmd->add_option("--n", ver.n);
  ver_cmd->add_option("--trials", ver.trials);
  ver_cmd->add_option("--samples", ver.samples);
  ver_cmd->add_flag("--inject-fault", ver.inject_fault, "perturb one instance per battery (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*xi_cmd) return cmd_xi(xi, out);
    if (*psi_cmd) return cmd_psi(prof, out);
    if (*mu_cmd) return cmd_mu(prof, out);
    if (*sub_cmd) return cmd_subsolution(sub, seed, threads, out);
    if (*bnd_cmd) return cmd_boundary(prob, threads, out);
    if (*solve_cmd) return cmd_solve(prob, seed, threads, out);
    if (*ver_cmd) return cmd_verify(ver, seed, threads, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
