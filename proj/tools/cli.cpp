#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualgeo/fixtures.hpp"
#include "dualgeo/geodesics.hpp"
#include "dualgeo/io.hpp"
#include "dualgeo/theorems.hpp"

namespace dualgeo::cli {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

Vec parse_vector(const std::string& text, int n, const char* flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    vals.push_back(v);
  }
  if (static_cast<int>(vals.size()) != n)
    throw UsageError(std::string(flag) + ": expected " + std::to_string(n) + " comma-separated values, got " +
                     std::to_string(vals.size()));
  return Eigen::Map<Vec>(vals.data(), n);
}

int default_grid() {
  const char* env = std::getenv("DUALGEO_GRID");
  if (!env || !*env) return 5;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 2 || v > 1000) throw UsageError("DUALGEO_GRID must be an integer in [2, 1000]");
  return static_cast<int>(v);
}

// q(τ) from an expression in `tau`.
ParameterFn parse_q(const std::string& text) {
  const std::string src = std::regex_replace(text, std::regex(R"(\btau\b)"), "x1");
  ParseContext ctx;
  ctx.dimension = 1;
  const Expression e = parse(src, ctx);
  return [e](double t) { return e.eval(Point::Constant(1, t)); };
}

void write_or_print(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-")
    out << content;
  else
    write_file_atomic(path, content);
}

std::string vec_text(const Vec& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct VerifyArgs {
  std::string fixture;
  std::string theorem = "all";
  std::string out;
  int grid = 0;
  RunOptions opts;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const Fixture f = resolve_fixture(a.fixture);
  RunOptions o = a.opts;
  o.per_axis = a.grid > 0 ? a.grid : default_grid();

  std::vector<std::string> suites;
  if (a.theorem == "all") {
    suites = applicable_suites(f);
  } else if (a.theorem == "1" || a.theorem == "2" || a.theorem == "weyl" || a.theorem == "digamma") {
    suites.push_back(a.theorem == "1" ? "theorem1" : a.theorem == "2" ? "theorem2" : a.theorem);
  } else {
    throw UsageError("--theorem must be 1, 2, weyl, digamma or all");
  }

  std::vector<SuiteResult> results;
  for (const auto& s : suites) {
    try {
      results.push_back(run_suite(s, f, o));
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
  }

  const json inputs = {{"fixture", a.fixture}, {"theorem", a.theorem}, {"grid", o.per_axis},
                       {"seed", o.seed},       {"steps", o.steps},     {"h", o.h},
                       {"trajectories", o.trajectories}};
  const Report report = make_report(f, o, std::move(results), inputs);

  for (const auto& s : report.suites) {
    out << s.suite << ": " << (s.pass() ? "pass" : "FAIL") << '\n';
    for (const auto& c : s.claims) {
      out << "  " << (c.pass() ? "pass" : "FAIL") << "  " << c.id << "  residual="
          << (std::isfinite(c.max_residual) ? format_double(c.max_residual) : "n/a")
          << (c.bound == Bound::Below ? " < " : " > ") << format_double(c.tolerance)
          << (c.expected_to_hold ? "" : "  (expected to fail)") << '\n';
    }
  }
  out << "verdict: " << (report.pass() ? "pass" : "FAIL") << '\n';
  if (!a.out.empty()) write_or_print(a.out, to_json(report).dump(2) + "\n", out);
  return report.pass() ? kPass : kClaimFailed;
}

struct TraceArgs {
  std::string fixture;
  std::string conn;
  std::string x0;
  std::string w0;
  int steps = 1000;
  double h = 1e-3;
  std::string q;
  std::string compare;
  std::string csv;
  std::string json_path;
  double max_step = 0.0;
};

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  const Fixture f = resolve_fixture(a.fixture);
  const int n = f.dim();
  ConnectionTag tag, other = ConnectionTag::Custom;
  try {
    tag = parse_connection_tag(a.conn);
    if (!a.compare.empty()) other = parse_connection_tag(a.compare);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const Point x0 = parse_vector(a.x0, n, "--x0");
  const Vec w0 = parse_vector(a.w0, n, "--w0");

  IntegrationOptions io;
  io.steps = a.steps;
  io.h = a.h;
  io.domain = &f.chart;
  if (a.max_step > 0) io.max_step_length = a.max_step;
  if (!a.q.empty()) io.q = parse_q(a.q);

  auto integrate = [&](ConnectionTag t) {
    const AffineConnection c = connection_for(f, t);
    Trajectory tr = integrate_dual_geodesic(c, x0, w0, io);
    if (tr.halted) {
      const auto& last = tr.states.back();
      err << "note: " << to_string(t) << " trajectory halted (" << to_string(tr.reason) << "): " << tr.halt_detail
          << "; last valid state tau=" << format_double(last.tau) << " x=" << vec_text(last.x)
          << " p=" << vec_text(last.p) << '\n';
    }
    return tr;
  };

  const Trajectory primary = integrate(tag);
  if (!a.csv.empty()) write_or_print(a.csv, trajectory_csv(primary), out);
  if (!a.json_path.empty()) {
    json j = trajectory_json(primary);
    j["fixture"] = f.name;
    j["x0"] = std::vector<double>(x0.data(), x0.data() + n);
    j["w0"] = std::vector<double>(w0.data(), w0.data() + n);
    if (!a.q.empty()) j["q"] = a.q;
    write_or_print(a.json_path, j.dump(2) + "\n", out);
  }
  if (a.compare.empty()) {
    if (a.csv.empty() && a.json_path.empty()) out << trajectory_csv(primary);
    return kPass;
  }
  const Trajectory secondary = integrate(other);
  const CoincidenceResult r = curves_coincide(primary, secondary);
  out << "coincide=" << (r.coincide ? "true" : "false") << " a_to_b=" << format_double(r.a_to_b)
      << " b_to_a=" << format_double(r.b_to_a) << " tol=" << format_double(r.tolerance)
      << " overlap_a=" << format_double(r.overlap_a) << " overlap_b=" << format_double(r.overlap_b) << '\n';
  return kPass;
}

int cmd_classify(const std::string& fixture, int grid, const std::string& out_path, std::ostream& out) {
  const Fixture f = resolve_fixture(fixture);
  if (f.kind != FamilyKind::Semidegenerate)
    throw UsageError("fixture '" + f.name + "' is nondegenerate; classification applies to semi-degenerate systems");
  const auto pts = f.sample_points(grid > 0 ? grid : default_grid());
  const ClassifyResult r = classify(f.model(), pts);
  out << "classification: " << to_string(r.verdict) << '\n';
  out << "max|N|: " << format_double(r.max_n) << " (tolerance " << format_double(r.tolerance) << ")\n";
  if (r.verdict == Classification::Weak) {
    json spots = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i)
      spots.push_back({{"point", std::vector<double>(pts[i].data(), pts[i].data() + pts[i].size())},
                       {"T_hat", tensor_json(r.t_hat[i])}});
    if (!out_path.empty()) {
      write_or_print(out_path, json{{"fixture", f.name}, {"classification", "WEAK"}, {"spots", spots}}.dump(2) + "\n",
                     out);
    } else {
      out << "T_hat at " << format_point(pts.front()) << ": " << tensor_json(r.t_hat.front()).dump() << '\n';
    }
  }
  return kPass;
}

int cmd_fixtures_list(std::ostream& out) {
  for (const auto& name : builtin_names()) out << name << "  " << builtin(name).description << '\n';
  return kPass;
}

int cmd_fixtures_export(const std::string& name, const std::string& path, std::ostream& out) {
  if (!is_builtin(name)) throw UsageError("unknown built-in fixture '" + name + "'");
  write_or_print(path.empty() ? "-" : path, builtin(name).source.dump(2) + "\n", out);
  return kPass;
}

int cmd_fixtures_validate(const std::string& source, std::ostream& out) {
  const Fixture f = is_builtin(source) ? builtin(source) : fixture_from_json(json::parse(read_file(source)));
  const auto failures = validate(f);
  if (failures.empty()) {
    out << f.name << ": all checks passed\n";
    return kPass;
  }
  out << validation_json(failures).dump(2) << '\n';
  return kValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure tensors, induced connections and dual-geodesics of superintegrable systems"};
  app.name("dualgeo");
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run verification suites on a fixture and report per-claim verdicts");
  verify->add_option("fixture", va.fixture, "Built-in fixture name or config path")->required();
  verify->add_option("--theorem", va.theorem, "Suite: 1, 2, weyl, digamma or all")->capture_default_str();
  verify->add_option("--out", va.out, "Write the JSON report here ('-' for stdout)");
  verify->add_option("--grid", va.grid, "Sample points per axis (default: $DUALGEO_GRID or 5)")
      ->check(CLI::Range(2, 1000));
  verify->add_option("--seed", va.opts.seed, "Seed for random initial conditions and candidates")
      ->capture_default_str();
  verify->add_option("--tol", va.opts.algebraic_tol, "Tolerance for algebraic claims")->capture_default_str();
  verify->add_option("--tol-trajectory", va.opts.trajectory_tol, "Hausdorff tolerance for trajectory claims")
      ->capture_default_str();
  verify->add_option("--tol-classify", va.opts.classify_tol, "max|N| below which a system is WEAK")
      ->capture_default_str();
  verify->add_option("--trajectories", va.opts.trajectories, "Trajectory pairs per claim")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  verify->add_option("--steps", va.opts.steps, "Integration steps")->check(CLI::Range(1, 10000000))
      ->capture_default_str();
  verify->add_option("--h", va.opts.h, "Integration step")->check(CLI::PositiveNumber)->capture_default_str();

  TraceArgs ta;
  auto* trace = app.add_subcommand("trace", "Integrate a dual-geodesic and export it as CSV/JSON");
  trace->add_option("fixture", ta.fixture, "Built-in fixture name or config path")->required();
  trace->add_option("--conn", ta.conn, "Connection: LC, +T, -T, +B, -B, +D, -D, +F, -F, +dagger, -dagger")
      ->required();
  trace->add_option("--x0", ta.x0, "Initial point, comma-separated without spaces (e.g. 1,2)")->required();
  trace->add_option("--w0", ta.w0, "Initial velocity, comma-separated without spaces")->required();
  trace->add_option("--steps", ta.steps, "Integration steps")->check(CLI::Range(1, 10000000))->capture_default_str();
  trace->add_option("--h", ta.h, "Integration step")->check(CLI::PositiveNumber)->capture_default_str();
  trace->add_option("--q", ta.q, "Non-affine parametrization q(tau), an expression in tau");
  trace->add_option("--compare", ta.compare, "Second connection; prints the coincidence verdict");
  trace->add_option("--csv", ta.csv, "Write CSV (tau,x1..xn,p1..pn) here ('-' for stdout)");
  trace->add_option("--json", ta.json_path, "Write JSON with metadata here ('-' for stdout)");
  trace->add_option("--max-step", ta.max_step, "Halt when one step moves x farther than this")
      ->check(CLI::PositiveNumber);

  std::string cl_fixture, cl_out;
  int cl_grid = 0;
  auto* cls = app.add_subcommand("classify", "Classify a semi-degenerate fixture as WEAK or STRONG");
  cls->add_option("fixture", cl_fixture, "Built-in fixture name or config path")->required();
  cls->add_option("--grid", cl_grid, "Sample points per axis")->check(CLI::Range(2, 1000));
  cls->add_option("--out", cl_out, "Write extracted T_hat spot values (WEAK only) as JSON");

  auto* fx = app.add_subcommand("fixtures", "List, export or validate fixtures");
  fx->require_subcommand(1);
  fx->add_subcommand("list", "List built-in fixtures");
  std::string ex_name, ex_out, val_source;
  auto* fx_export = fx->add_subcommand("export", "Print a built-in fixture's config");
  fx_export->add_option("name", ex_name, "Built-in fixture name")->required();
  fx_export->add_option("--out", ex_out, "Write to this path instead of stdout");
  auto* fx_validate = fx->add_subcommand("validate", "Run all validation checks on a fixture");
  fx_validate->add_option("source", val_source, "Built-in fixture name or config path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kPass;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(va, out);
    if (trace->parsed()) return cmd_trace(ta, out, err);
    if (cls->parsed()) return cmd_classify(cl_fixture, cl_grid, cl_out, out);
    if (fx->got_subcommand("list")) return cmd_fixtures_list(out);
    if (fx_export->parsed()) return cmd_fixtures_export(ex_name, ex_out, out);
    if (fx_validate->parsed()) return cmd_fixtures_validate(val_source, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n' << validation_json(e.failures()).dump(2) << '\n';
    return kValidation;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace dualgeo::cli
