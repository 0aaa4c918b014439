#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "gausscol/convergence.hpp"
#include "gausscol/diffmat.hpp"
#include "gausscol/ocp.hpp"
#include "gausscol/quadrature.hpp"
#include "gausscol/report.hpp"
#include "gausscol/solver.hpp"

namespace gausscol::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int parse_int(const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

struct Options {
  std::string format = "csv";
  std::string output = "-";
};

/// Writes either to the named file or to `out` for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : stream_(&out) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void emit(const Options& o, std::ostream& out, const CsvTable& table, const nlohmann::json& json) {
  Sink sink(o.output, out);
  if (o.format == "json") {
    sink.get() << json.dump(2) << '\n';
  } else {
    write_csv(sink.get(), table);
  }
}

BuiltinProblem lookup_problem(const std::string& name) {
  try {
    return builtin_problem(name);
  } catch (const std::invalid_argument& e) {
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError(std::string(e.what()) + " (known: " + known + ")");
  }
}

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output,-o", o.output, "Output path, '-' for standard output");
}

}  // namespace

std::vector<int> parse_n_list(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty N list");
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("empty entry in N list '" + text + "'");
    std::vector<int> parts;
    std::stringstream part_stream(item);
    std::string part;
    while (std::getline(part_stream, part, ':')) parts.push_back(parse_int(part));
    if (item.back() == ':' || parts.empty() || parts.size() > 3) throw std::invalid_argument("bad range '" + item + "'");
    if (parts.size() == 1) {
      values.push_back(parts[0]);
      continue;
    }
    const int first = parts[0];
    const int last = parts[1];
    const int step = parts.size() == 3 ? parts[2] : 1;
    if (step < 1 || last < first) throw std::invalid_argument("bad range '" + item + "'");
    for (int v = first; v <= last; v += step) values.push_back(v);
  }
  for (int v : values) {
    if (v < 1) throw std::invalid_argument("N must be >= 1, got " + std::to_string(v));
  }
  return values;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gauss orthogonal collocation for unconstrained optimal control", "gausscol"};
  app.require_subcommand(1);

  Options opts;
  int n = 0;
  std::string n_list_text;
  std::string problem_name;
  double tolerance = 1e-10;
  int max_iterations = 50;
  std::string endpoint = "minimum-principle";
  bool no_warm_start = false;
  std::string initial_guess = "forward-backward";
  const auto guess_names = CLI::IsMember({"forward-backward", "constant", "oracle"});

  auto* rule = app.add_subcommand("rule", "Print Gauss nodes and weights");
  rule->add_option("--n", n, "Number of collocation points")->required();
  add_output_options(rule, opts);

  auto* certify_cmd = app.add_subcommand("certify", "Check the inverse-norm properties of D");
  certify_cmd->add_option("--n", n_list_text, "N values, e.g. 25,50 or 25:300:25")->required();
  add_output_options(certify_cmd, opts);

  auto* solve = app.add_subcommand("solve", "Solve a builtin problem at one N");
  solve->add_option("--problem", problem_name, "Builtin problem name")->required();
  solve->add_option("--n", n, "Number of collocation points")->default_val(10);
  solve->add_option("--tolerance", tolerance, "Residual tolerance");
  solve->add_option("--max-iterations", max_iterations, "Newton iteration budget");
  solve->add_option("--endpoint", endpoint, "Endpoint control recovery")
      ->check(CLI::IsMember({"minimum-principle", "interpolation"}));
  solve->add_option("--initial-guess", initial_guess, "Newton starting point")->check(guess_names);
  add_output_options(solve, opts);

  auto* sweep = app.add_subcommand("sweep", "Convergence sweep against the analytic solution");
  sweep->add_option("--problem", problem_name, "Builtin problem name")->required();
  sweep->add_option("--n", n_list_text, "Ascending N values, e.g. 5:25:2")->required();
  sweep->add_option("--tolerance", tolerance, "Residual tolerance");
  sweep->add_option("--max-iterations", max_iterations, "Newton iteration budget");
  sweep->add_flag("--no-warm-start", no_warm_start, "Cold-start every N");
  sweep->add_option("--initial-guess", initial_guess, "Newton starting point for cold starts")->check(guess_names);
  add_output_options(sweep, opts);

  std::vector<std::string> argv_storage{"gausscol"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*rule) {
      if (n < 1) throw UsageError("--n must be >= 1");
      const GaussRule r = gauss_rule(n);
      emit(opts, out, rule_table(r), rule_json(r));
      return kExitOk;
    }

    if (*certify_cmd) {
      std::vector<int> ns;
      try {
        ns = parse_n_list(n_list_text);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const CertificationReport report = certify(ns);
      emit(opts, out, certification_table(report), certification_json(report));
      for (const auto& r : report.rows) {
        if (r.p1_flagged) err << "flagged: N=" << r.n << " P1 norm " << format_double(r.p1.norm) << '\n';
        if (r.p2_flagged) err << "flagged: N=" << r.n << " P2 norm " << format_double(r.p2.max_row_norm) << '\n';
      }
      return report.flagged() ? kExitNumeric : kExitOk;
    }

    if (*solve || *sweep) {
      if (!(tolerance > 0.0)) throw UsageError("--tolerance must be positive");
      if (max_iterations < 1) throw UsageError("--max-iterations must be >= 1");
    }
    auto solver_options = [&](const BuiltinProblem& problem) {
      SolverOptions so;
      so.tolerance = tolerance;
      so.max_iterations = max_iterations;
      if (initial_guess == "constant") so.initial_guess = InitialGuess::constant;
      if (initial_guess == "oracle") {
        if (!problem.oracle) throw UsageError("problem '" + problem_name + "' has no analytic solution");
        so.initial_guess = InitialGuess::oracle;
        so.oracle = problem.oracle;
      }
      return so;
    };

    if (*solve) {
      if (n < 1) throw UsageError("--n must be >= 1");
      const BuiltinProblem problem = lookup_problem(problem_name);
      SolverOptions so = solver_options(problem);
      so.endpoint_mode = endpoint == "interpolation" ? EndpointMode::interpolation : EndpointMode::minimum_principle;
      const DiffMatrices dm = build_diff_matrices(n);
      const SolveResult result = newton_solve(problem.spec, dm, so);
      emit(opts, out, solution_table(problem.spec, dm.rule, result, problem.oracle),
           solution_json(problem.spec, dm.rule, result, problem.oracle));
      out << "status=" << to_string(result.status) << " iterations=" << result.solution.iterations
          << " residual=" << format_double(result.solution.residual_norm) << '\n';
      if (!result.converged()) err << "solve failed: " << result.message << '\n';
      return result.converged() ? kExitOk : kExitNumeric;
    }

    if (*sweep) {
      std::vector<int> ns;
      try {
        ns = parse_n_list(n_list_text);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      for (std::size_t k = 1; k < ns.size(); ++k) {
        if (ns[k] <= ns[k - 1]) throw UsageError("--n values must be strictly ascending");
      }
      const BuiltinProblem problem = lookup_problem(problem_name);
      if (!problem.oracle) throw UsageError("problem '" + problem_name + "' has no analytic solution");
      const SolverOptions so = solver_options(problem);
      const ConvergenceReport report = run_sweep(problem.spec, *problem.oracle, ns, so, !no_warm_start);
      emit(opts, out, convergence_table(report), convergence_json(report));
      const auto& f = report.fitted_rates;
      out << "rates: state=" << format_double(f.state) << " control=" << format_double(f.control)
          << " costate=" << format_double(f.costate);
      if (!f.sufficient) out << " (insufficient points: need >= " << kMinFitPoints << " above the error floor)";
      out << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

}  // namespace gausscol::cli
