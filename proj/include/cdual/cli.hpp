#pragma once

// Command layer behind the `cdual` tool. Each command writes to the given
// streams and returns the process exit code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cdual/classifier.hpp"
#include "cdual/curves.hpp"
#include "cdual/instance_io.hpp"
#include "cdual/oracle.hpp"
#include "cdual/report.hpp"

namespace cdual::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kToleranceBreach = 3, kVerificationFailure = 4 };

struct SolveOptions {
  std::string instance;
  std::string out;  // report file; empty for none
  bool json = false;
};

struct CurvesOptions {
  std::string instance;
  std::string out = ".";
  std::optional<double> sigma_min, sigma_max, x_min, x_max;
  int samples = 1600;
};

struct VerifyOptions {
  std::string instance;
  int starts = 512;
  std::uint64_t seed = oracle::DescentOptions{}.seed;
  std::optional<double> box_lo, box_hi;
  bool json = false;
};

struct CountOptions {
  std::string instance;
  bool json = false;
};

namespace detail {

inline void input_error(std::ostream& err, const io::InputError& e) {
  err << "error: " << e.what() << '\n';
}

}  // namespace detail

inline int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  SolutionReport rep = [&] {
    const ProblemSpec spec = io::load_instance(opt.instance);
    return solve(spec);
  }();
  const io::json doc = io::report_json(rep);
  if (!opt.out.empty()) {
    std::ofstream f(opt.out);
    if (!f) throw io::InputError("out", "cannot write '" + opt.out + "'");
    f << doc.dump(2) << '\n';
  }
  if (opt.json) out << doc.dump(2) << '\n';
  else io::print_report(out, rep);
  if (!rep.verification.ok()) {
    err << "error: tolerance breach (relative gap " << io::fmt(rep.verification.max_relative_gap)
        << ", gradient ratio " << io::fmt(rep.verification.max_gradient_ratio) << ", residual ratio "
        << io::fmt(rep.verification.max_residual_ratio) << ")\n";
    return kToleranceBreach;
  }
  return kOk;
}

inline int cmd_curves(const CurvesOptions& opt, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = io::load_instance(opt.instance);
  const SolutionReport rep = solve(spec);
  auto [slo, shi] = io::default_sigma_range(rep.constants);
  if (opt.sigma_min) slo = *opt.sigma_min;
  if (opt.sigma_max) shi = *opt.sigma_max;
  const auto dual = io::sample_dual_curve(rep, slo, shi, opt.samples);

  std::vector<io::PrimalSample> primal;
  if (spec.n() == 1) {
    auto [xlo, xhi] = io::default_x_range(rep);
    if (opt.x_min) xlo = *opt.x_min;
    if (opt.x_max) xhi = *opt.x_max;
    primal = io::sample_primal_curve(rep, xlo, xhi, opt.samples);
  }

  namespace fs = std::filesystem;
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::InputError("out", "cannot create directory '" + opt.out + "': " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw io::InputError("out", "cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("dual_curve.csv");
    io::write_dual_curve(f, rep, dual);
  }
  out << (dir / "dual_curve.csv").string() << "  " << dual.rows.size() << " rows\n";
  if (spec.n() == 1) {
    auto f = open("primal_curve.csv");
    io::write_primal_curve(f, rep, primal);
    out << (dir / "primal_curve.csv").string() << "  " << primal.size() << " rows\n";
  }
  {
    auto f = open("annotations.csv");
    io::write_annotations(f, rep);
  }
  out << (dir / "annotations.csv").string() << '\n';
  for (double p : dual.omitted) err << "note: omitted pole sample at sigma = " << io::fmt(p) << '\n';
  return kOk;
}

/// One line of the verification table.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string detail;
};

namespace detail {

inline bool sorted_lists_match(std::vector<double> a, std::vector<double> b, double tol, double& worst) {
  worst = 0.0;
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return worst <= tol;
}

inline oracle::Box default_box(const SolutionReport& rep) {
  const int n = rep.spec.n();
  Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  auto take = [&](const Vector& x) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  };
  for (const auto& p : rep.points) take(p.x);
  for (const auto& m : rep.manifolds) {
    const double r = std::sqrt(m.geometry.radius_squared);
    take(m.geometry.center - Vector::Constant(n, r));
    take(m.geometry.center + Vector::Constant(n, r));
  }
  const Vector margin = ((hi - lo) * 0.25).cwiseMax(1.0);
  return {lo - margin, hi + margin};
}

}  // namespace detail

inline std::vector<Check> run_verification(const SolutionReport& rep, const VerifyOptions& opt) {
  std::vector<Check> checks;
  const auto& spec = rep.spec;
  const auto& v = rep.verification;
  checks.push_back({"duality gap", v.max_relative_gap, ClassifierTolerances{}.gap, v.gap_ok, "relative to max(1,|P|)"});
  checks.push_back({"stationarity", v.max_gradient_ratio, ClassifierTolerances{}.stationarity, v.stationarity_ok,
                    "|grad P| / scale"});
  checks.push_back({"dual residual", v.max_residual_ratio, 1.0, v.residual_ok, "residual / bound"});

  std::vector<Vector> xs;
  for (const auto& p : rep.points) xs.push_back(p.x);
  for (const auto& m : rep.manifolds) {
    for (const auto& x : m.points) xs.push_back(x);
    if (spec.n() > 1) {
      Vector x = m.geometry.center;
      x(0) += std::sqrt(m.geometry.radius_squared);
      xs.push_back(std::move(x));
    }
  }
  double fd1 = 0.0, fd2 = 0.0;
  for (const auto& x : xs) {
    fd1 = std::max(fd1, oracle::finite_difference_check(spec, x, 1));
    fd2 = std::max(fd2, oracle::finite_difference_check(spec, x, 2));
  }
  checks.push_back({"finite-difference gradient", fd1, 1e-5, fd1 <= 1e-5, std::to_string(xs.size()) + " points"});
  checks.push_back({"finite-difference hessian", fd2, 1e-5, fd2 <= 1e-5, std::to_string(xs.size()) + " points"});

  const bool degenerate = std::any_of(rep.roots.begin(), rep.roots.end(),
                                      [](const DualRoot& r) { return r.tag == RootTag::Peak; });
  if (spec.n() == 1) {
    const auto iso = oracle::isolate_derivative_roots(spec);
    std::vector<double> mine;
    for (const auto& x : xs) mine.push_back(x(0));
    double worst = 0.0;
    bool ok = detail::sorted_lists_match(mine, iso.refined_roots, 1e-8, worst);
    std::string note = std::to_string(mine.size()) + " = " + std::to_string(iso.refined_roots.size()) + " roots";
    if (degenerate) {
      // A double root of dP/dx: floating-point Sturm counts are unreliable.
      ok = true;
      note += " (inflection present, not compared)";
    }
    checks.push_back({"oracle root equivalence", worst, 1e-8, ok, note});
  }

  if (rep.constants.H1 > 0.0) {
    const auto iso = oracle::isolate_real_roots(dual_polynomial_coefficients(DualCurve(spec)));
    std::vector<double> sturm, mine;
    for (double s : iso.refined_roots)
      if (s > rep.constants.H2) sturm.push_back(s);
    for (const auto& r : rep.roots) mine.push_back(r.sigma);
    double worst = 0.0;
    bool ok = detail::sorted_lists_match(mine, sturm, 1e-8, worst);
    std::string note = std::to_string(mine.size()) + " = " + std::to_string(sturm.size()) + " roots";
    if (degenerate) {
      ok = true;
      note += " (inflection present, not compared)";
    }
    checks.push_back({"dual roots vs Sturm", worst, 1e-8, ok, note});
  }

  if (spec.n() > 1) {
    oracle::Box box = detail::default_box(rep);
    if (opt.box_lo) box.lo.setConstant(*opt.box_lo);
    if (opt.box_hi) box.hi.setConstant(*opt.box_hi);
    oracle::DescentOptions dopt;
    dopt.seed = opt.seed;
    const auto ms = oracle::multistart_descent(spec, opt.starts, box, dopt);
    const double g = rep.global_min_value;
    const double scale = std::max(1.0, std::abs(g));
    const double below = g - ms.best_value;
    checks.push_back({"multistart never beats global min", std::max(0.0, below) / scale, 1e-7,
                      !(below > 1e-7 * scale),
                      std::to_string(opt.starts) + " starts, " + std::to_string(ms.dropped) + " dropped"});
    const double miss = std::abs(ms.best_value - g) / scale;
    checks.push_back({"multistart best matches global min", miss, 1e-6, miss <= 1e-6,
                      "best " + io::fmt(ms.best_value) + " vs " + io::fmt(g)});
  }
  return checks;
}

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  const ProblemSpec spec = io::load_instance(opt.instance);
  const SolutionReport rep = solve(spec);
  const auto checks = run_verification(rep, opt);
  if (opt.json) {
    io::json arr = io::json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"pass", c.pass},
                     {"detail", c.detail}});
    out << io::json{{"instance_hash", io::instance_hash(spec)}, {"checks", arr}}.dump(2) << '\n';
  } else {
    std::vector<std::vector<std::string>> rows{{"check", "measured", "tolerance", "status", "detail"}};
    for (const auto& c : checks)
      rows.push_back({c.name, io::fmt(c.measured), io::fmt(c.tolerance), c.pass ? "PASS" : "FAIL", c.detail});
    io::detail::print_table(out, rows);
  }
  for (const auto& c : checks) {
    if (!c.pass) {
      err << "verification failed: " << c.name << '\n';
      return kVerificationFailure;
    }
  }
  if (!opt.json) out << "PASS\n";
  return kOk;
}

inline int cmd_count(const CountOptions& opt, std::ostream& out, std::ostream&) {
  const ProblemSpec spec = io::load_instance(opt.instance);
  const SolutionReport rep = solve(spec);
  if (opt.json) {
    out << io::json{{"count", rep.count.count},
                    {"with_multiplicity", rep.count.count_with_multiplicity},
                    {"case", rep.count.case_label}}
               .dump(2)
        << '\n';
  } else {
    out << rep.count.count << '\n' << "case: " << rep.count.case_label << '\n';
    if (rep.count.count_with_multiplicity != rep.count.count)
      out << "with multiplicity: " << rep.count.count_with_multiplicity << '\n';
  }
  return kOk;
}

/// Parses arguments and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical points of nested octic polynomials by canonical duality"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance and print the report");
  solve_cmd->add_option("--instance", solve_opt.instance, "Instance JSON file")->required();
  solve_cmd->add_option("--out", solve_opt.out, "Write the JSON report here");
  solve_cmd->add_flag("--json", solve_opt.json, "Print the JSON report instead of the table");

  CurvesOptions curves_opt;
  auto* curves_cmd = app.add_subcommand("curves", "Sample the dual and primal curves to CSV");
  curves_cmd->add_option("--instance", curves_opt.instance, "Instance JSON file")->required();
  curves_cmd->add_option("--out", curves_opt.out, "Output directory")->capture_default_str();
  curves_cmd->add_option("--sigma-min", curves_opt.sigma_min, "Lower end of the sigma range");
  curves_cmd->add_option("--sigma-max", curves_opt.sigma_max, "Upper end of the sigma range");
  curves_cmd->add_option("--x-min", curves_opt.x_min, "Lower end of the x range (n = 1)");
  curves_cmd->add_option("--x-max", curves_opt.x_max, "Upper end of the x range (n = 1)");
  curves_cmd->add_option("--samples", curves_opt.samples, "Grid points per curve")->capture_default_str();

  VerifyOptions verify_opt;
  auto* verify_cmd = app.add_subcommand("verify", "Cross-check the solution against independent oracles");
  verify_cmd->add_option("--instance", verify_opt.instance, "Instance JSON file")->required();
  verify_cmd->add_option("--starts", verify_opt.starts, "Multistart descent starts (n >= 2)")->capture_default_str();
  verify_cmd->add_option("--seed", verify_opt.seed, "Seed for the start sequence")->capture_default_str();
  verify_cmd->add_option("--box-lo", verify_opt.box_lo, "Lower corner of the start box (all coordinates)");
  verify_cmd->add_option("--box-hi", verify_opt.box_hi, "Upper corner of the start box (all coordinates)");
  verify_cmd->add_flag("--json", verify_opt.json, "Machine-readable output");

  CountOptions count_opt;
  auto* count_cmd = app.add_subcommand("count", "Number of critical points and the case that applies");
  count_cmd->add_option("--instance", count_opt.instance, "Instance JSON file")->required();
  count_cmd->add_flag("--json", count_opt.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_opt, out, err);
    if (*curves_cmd) return cmd_curves(curves_opt, out, err);
    if (*verify_cmd) {
      if (verify_opt.starts < 1) throw io::InputError("starts", "must be positive");
      return cmd_verify(verify_opt, out, err);
    }
    if (*count_cmd) return cmd_count(count_opt, out, err);
  } catch (const io::InputError& e) {
    detail::input_error(err, e);
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailure;
  }
  return kInputError;
}

}  // namespace cdual::cli
