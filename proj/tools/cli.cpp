#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>
#include <json.hpp>

#include "sagd/constants.hpp"
#include "sagd/data_io.hpp"
#include "sagd/error.hpp"
#include "sagd/planner.hpp"
#include "sagd/verify.hpp"

namespace sagd::cli {

namespace {

using nlohmann::json;

struct DataOptions {
  std::string data_path;
  std::optional<Index> dim;
  std::string synth;
  std::uint64_t synth_seed = 1;
  bool normalize = false;
  std::string loss = "ridge";
  std::optional<double> lambda;
};

struct LoadedProblem {
  Dataset data;
  LossSpec loss;
  std::string id;
};

struct SolveOptions {
  std::string q = "auto";
  std::string tau = "auto";
  std::string alpha = "auto";
  std::string seeds = "0";
  double tol = 1e-10;
  double max_passes = 500.0;
  double check_every = 1.0;
  std::string table_init = "at-x0";
  bool lyapunov = false;
  std::string out;
  std::string plot;
  std::string plot_axis = "effective_passes";
  bool json = false;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

double parse_real(const std::string& text, const char* what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw InvalidInput(std::string(what) + ": expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int parse_integer(std::string text, const char* what) {
  while (!text.empty() && text.front() == ' ') text.erase(text.begin());
  while (!text.empty() && text.back() == ' ') text.pop_back();
  Int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw InvalidInput(std::string(what) + ": expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::filesystem::path output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative())
    if (const char* dir = std::getenv("SAGD_OUTPUT_DIR"); dir && *dir)
      p = std::filesystem::path(dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

void add_data_options(CLI::App& cmd, DataOptions& o) {
  cmd.add_option("--data", o.data_path, "LIBSVM file");
  cmd.add_option("--dim", o.dim, "Force the feature dimension of --data");
  cmd.add_option("--synth", o.synth, "Synthetic data n,d,gaussian|uniform");
  cmd.add_option("--synth-seed", o.synth_seed, "Seed of the synthetic generator");
  cmd.add_flag("--normalize", o.normalize, "Scale every row to unit norm");
  cmd.add_option("--loss", o.loss, "ridge or logistic")->check(CLI::IsMember({"ridge", "logistic"}));
  cmd.add_option("--lambda", o.lambda, "Regularization (default 1/n)");
}

LoadedProblem load_problem(const DataOptions& o) {
  if (o.data_path.empty() == o.synth.empty())
    throw InvalidInput("give exactly one of --data or --synth");
  LoadedProblem p;
  if (!o.data_path.empty()) {
    p.data = parse_libsvm(o.data_path, o.dim);
    p.id = o.data_path;
  } else {
    const auto parts = split(o.synth, ',');
    if (parts.size() != 3) throw InvalidInput("--synth expects n,d,dist");
    const auto n = parse_integer<Index>(parts[0], "--synth n");
    const auto d = parse_integer<Index>(parts[1], "--synth d");
    const SynthDist dist = parse_synth_dist(parts[2]);
    p.data = synthesize(dist, n, d, o.synth_seed);
    p.id = "synth:" + std::string(to_string(dist)) + ":" + std::to_string(n) + "x" +
           std::to_string(d) + ":seed=" + std::to_string(o.synth_seed);
  }
  if (o.normalize) {
    p.data = normalize_rows(p.data);
    p.id += ":normalized";
  }
  p.loss.kind = parse_loss_kind(o.loss);
  p.loss.lambda = o.lambda ? *o.lambda : 1.0 / static_cast<double>(p.data.n());
  validate(p.data, p.loss);
  return p;
}

json candidate_json(const PlanCandidate& c) {
  return {{"tau", c.tau},
          {"kind", to_string(c.kind)},
          {"q", c.q},
          {"omega", c.omega_coef},
          {"alpha", c.alpha},
          {"unproven_range", c.unproven_range}};
}

json plan_json(const Plan& plan) {
  json j;
  j["profile"] = {{"n", plan.profile.n},
                  {"L_max", plan.profile.L_max},
                  {"L_bar", plan.profile.L_bar},
                  {"mu", plan.profile.mu}};
  j["best"] = candidate_json(plan.best);
  j["saga_omega"] = plan.saga_omega;
  j["tau_star_q1"] = plan.tau_star_q1;
  j["candidates"] = json::array();
  for (const auto& c : plan.candidates) j["candidates"].push_back(candidate_json(c));
  if (plan.profile.n >= 3) {
    const GdInterpolation gd = gd_interpolation_params(plan.profile);
    j["tau_n"] = {{"regime", to_string(gd.regime)},
                  {"q", gd.q},
                  {"alpha", gd.alpha},
                  {"omega", gd.omega_coef}};
  }
  return j;
}

void print_plan(const Plan& plan, std::ostream& out) {
  const auto& p = plan.profile;
  out << "profile: n=" << p.n << " L_max=" << fmt(p.L_max) << " L_bar=" << fmt(p.L_bar)
      << " mu=" << fmt(p.mu) << " 4L_max/mu=" << fmt(p.kappa_max()) << '\n';
  out << std::left << std::setw(8) << "tau" << std::setw(15) << "kind" << std::setw(18) << "q"
      << std::setw(18) << "omega" << "alpha\n";
  for (const auto& c : plan.candidates) {
    out << std::setw(8) << c.tau << std::setw(15) << to_string(c.kind) << std::setw(18)
        << fmt(c.q) << std::setw(18) << fmt(c.omega_coef) << fmt(c.alpha)
        << (c.unproven_range ? "  (outside proven range)" : "") << '\n';
  }
  out << "best: q*=" << fmt(plan.best.q) << " tau*=" << plan.best.tau << " ("
      << to_string(plan.best.kind) << ") omega=" << fmt(plan.best.omega_coef)
      << " alpha=" << fmt(plan.best.alpha) << '\n';
  out << "saga baseline omega(0,1)=" << fmt(plan.saga_omega) << '\n';
  out << "tau*(q=1)=" << plan.tau_star_q1 << '\n';
  if (p.n >= 3) {
    const GdInterpolation gd = gd_interpolation_params(p);
    out << "tau=n interpolation (" << to_string(gd.regime) << "): q=" << fmt(gd.q)
        << " alpha=" << fmt(gd.alpha) << " omega=" << fmt(gd.omega_coef) << '\n';
  }
}

int cmd_plan(const DataOptions& data_opts, const std::optional<Index>& n,
             const std::optional<double>& L_max, const std::optional<double>& mu,
             const std::optional<double>& L_bar, bool as_json, std::ostream& out) {
  ProfileSummary profile;
  if (n || L_max || mu || L_bar) {
    if (!n || !L_max || !mu)
      throw InvalidInput("an explicit profile needs --n, --L-max and --mu (--L-bar optional)");
    profile = {*n, *L_max, L_bar ? *L_bar : *L_max, *mu};
  } else {
    const LoadedProblem problem = load_problem(data_opts);
    profile = smoothness_profile(problem.data, problem.loss).summary();
  }
  const Plan plan = optimal_plan(profile);
  if (as_json) out << plan_json(plan).dump(2) << '\n';
  else print_plan(plan, out);
  return kOk;
}

struct ResolvedParams {
  double q = 0.0;
  Index tau = 1;
  std::optional<double> alpha;
  std::optional<Plan> plan;
};

ResolvedParams resolve_params(const LoadedProblem& problem, const std::string& q_text,
                              const std::string& tau_text, const std::string& alpha_text) {
  ResolvedParams r;
  if (q_text == "auto" || tau_text == "auto") {
    r.plan = optimal_plan(smoothness_profile(problem.data, problem.loss).summary());
    r.q = r.plan->best.q;
    r.tau = r.plan->best.tau;
  }
  if (q_text != "auto") r.q = parse_real(q_text, "--q");
  if (tau_text != "auto") r.tau = parse_integer<Index>(tau_text, "--tau");
  InterpolationConfig{r.q, r.tau, problem.data.n()}.validate();
  if (alpha_text != "auto") {
    r.alpha = parse_real(alpha_text, "--alpha");
    if (!(*r.alpha > 0.0) || !std::isfinite(*r.alpha))
      throw InvalidInput("--alpha must be a positive number");
  }
  return r;
}

SolverConfig solver_config(const SolveOptions& o, const ResolvedParams& p) {
  SolverConfig cfg;
  cfg.q = p.q;
  cfg.tau = p.tau;
  cfg.alpha = p.alpha;
  cfg.table_init = parse_table_init(o.table_init);
  cfg.tol = o.tol;
  cfg.max_effective_passes = o.max_passes;
  cfg.check_every_passes = o.check_every;
  cfg.track_lyapunov = o.lyapunov;
  if (!(o.tol > 0.0)) throw InvalidInput("--tol must be positive");
  if (!(o.max_passes > 0.0)) throw InvalidInput("--max-passes must be positive");
  if (!(o.check_every > 0.0)) throw InvalidInput("--check-every must be positive");
  return cfg;
}

void write_outputs(const SolveOptions& o, const LoadedProblem& problem, const SolverConfig& cfg,
                   const std::vector<std::uint64_t>& seeds, const std::vector<RunResult>& results,
                   const std::string& started, std::ostream& out) {
  if (o.out.empty()) {
    if (!o.plot.empty()) throw InvalidInput("--plot needs --out");
    return;
  }
  std::vector<ResultRow> rows;
  ResultsManifest manifest;
  const auto csv = output_path(o.out);
  manifest.results_file = csv.filename().string();
  manifest.build = build_identifier();
  const std::string finished = current_timestamp();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto part =
        rows_from_trajectory(cfg.q, cfg.tau, seeds[i], problem.data.n(), results[i].trajectory);
    rows.insert(rows.end(), part.begin(), part.end());
    manifest.runs.push_back({problem.id, to_string(problem.loss.kind), problem.loss.lambda, cfg.q,
                             cfg.tau, results[i].alpha, seeds[i], manifest.build, started,
                             finished});
  }
  write_results_csv(rows, csv);
  write_manifest(manifest, manifest_path_for(csv));
  out << "wrote " << csv.string() << '\n';
  if (!o.plot.empty()) {
    const auto svg = output_path(o.plot);
    emit_svg_plot(csv, parse_plot_axis(o.plot_axis), svg);
    out << "wrote " << svg.string() << '\n';
  }
}

Eigen::VectorXd reference_solution(const LoadedProblem& problem) {
  return exact_solution(problem.data, problem.loss);
}

int cmd_run(const DataOptions& data_opts, const SolveOptions& o, std::ostream& out,
            std::ostream& err) {
  const LoadedProblem problem = load_problem(data_opts);
  const ResolvedParams params = resolve_params(problem, o.q, o.tau, o.alpha);
  if (params.plan && !o.json)
    out << "plan: q*=" << fmt(params.plan->best.q) << " tau*=" << params.plan->best.tau
        << " omega=" << fmt(params.plan->best.omega_coef)
        << " (saga omega=" << fmt(params.plan->saga_omega) << ")\n";
  SolverConfig cfg = solver_config(o, params);
  std::vector<std::uint64_t> seeds = parse_seed_list(o.seeds);
  std::sort(seeds.begin(), seeds.end());

  const Eigen::VectorXd x_star = reference_solution(problem);
  const std::string started = current_timestamp();
  const std::vector<RunResult> results = run_seeds(problem.data, problem.loss, cfg, seeds, x_star);

  const Index n = problem.data.n();
  bool all_converged = true;
  std::vector<double> passes;
  json runs = json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const RunResult& r = results[i];
    const TrajectoryPoint& last = r.trajectory.back();
    all_converged = all_converged && r.converged;
    passes.push_back(r.effective_passes(n));
    runs.push_back({{"seed", seeds[i]},
                    {"converged", r.converged},
                    {"effective_passes", r.effective_passes(n)},
                    {"wall_seconds", last.wall_seconds},
                    {"error", last.error},
                    {"iterations", last.iter}});
    if (!o.json)
      out << "seed " << seeds[i] << ": " << (r.converged ? "converged" : "NOT converged")
          << " passes=" << fmt(r.effective_passes(n)) << " wall=" << fmt(last.wall_seconds)
          << "s error=" << fmt(last.error) << '\n';
  }
  const double med = median(passes);
  if (o.json) {
    json j = {{"method", method_label(cfg.q, cfg.tau)},
              {"q", cfg.q},
              {"tau", cfg.tau},
              {"alpha", results.front().alpha},
              {"median_passes", med},
              {"converged", all_converged},
              {"runs", runs}};
    if (params.plan) j["plan"] = plan_json(*params.plan);
    out << j.dump(2) << '\n';
  } else {
    out << method_label(cfg.q, cfg.tau) << " q=" << fmt(cfg.q) << " tau=" << cfg.tau
        << " alpha=" << fmt(results.front().alpha) << " median passes=" << fmt(med) << '\n';
  }
  write_outputs(o, problem, cfg, seeds, results, started, o.json ? err : out);
  return all_converged ? kOk : kNotConverged;
}

int cmd_sweep(const DataOptions& data_opts, const SolveOptions& o, const std::string& taus_text,
              std::ostream& out, std::ostream& err) {
  const LoadedProblem problem = load_problem(data_opts);
  const Plan plan = optimal_plan(smoothness_profile(problem.data, problem.loss).summary());
  const double q = o.q == "auto" ? plan.best.q : parse_real(o.q, "--q");
  const Index n = problem.data.n();
  std::vector<Index> taus;
  if (taus_text.empty()) {
    const Index hi = std::min<Index>(n, 4 * plan.best.tau);
    for (Index t = 1; t <= hi; ++t) taus.push_back(t);
  } else {
    taus = parse_tau_list(taus_text);
  }
  std::vector<std::uint64_t> seeds = parse_seed_list(o.seeds);
  std::sort(seeds.begin(), seeds.end());
  const Eigen::VectorXd x_star = reference_solution(problem);

  bool all_converged = true;
  std::vector<double> medians;
  json rows = json::array();
  for (Index tau : taus) {
    ResolvedParams p;
    p.q = q;
    p.tau = tau;
    InterpolationConfig{q, tau, n}.validate();
    if (o.alpha != "auto") p.alpha = parse_real(o.alpha, "--alpha");
    const SolverConfig cfg = solver_config(o, p);
    const auto results = run_seeds(problem.data, problem.loss, cfg, seeds, x_star);
    std::vector<double> passes;
    for (const auto& r : results) {
      all_converged = all_converged && r.converged;
      passes.push_back(r.effective_passes(n));
    }
    medians.push_back(median(passes));
    rows.push_back({{"tau", tau}, {"median_passes", medians.back()}});
    if (!o.json) out << "tau=" << tau << " median passes=" << fmt(medians.back()) << '\n';
  }
  const auto best = std::min_element(medians.begin(), medians.end()) - medians.begin();
  const Index argmin = taus[static_cast<std::size_t>(best)];
  if (o.json) {
    out << json{{"q", q}, {"tau_star", plan.best.tau}, {"argmin_tau", argmin}, {"rows", rows}}
               .dump(2)
        << '\n';
  } else {
    out << "q=" << fmt(q) << " argmin tau=" << argmin << " theoretical tau*=" << plan.best.tau
        << '\n';
  }
  if (!o.out.empty()) {
    const auto path = output_path(o.out);
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << "tau,median_passes\n" << std::setprecision(17);
    for (std::size_t i = 0; i < taus.size(); ++i) f << taus[i] << ',' << medians[i] << '\n';
    if (!f) throw IoError("write to '" + path.string() + "' failed");
    (o.json ? err : out) << "wrote " << path.string() << '\n';
  }
  return all_converged ? kOk : kNotConverged;
}

int cmd_verify(Index n_max, double perturb, bool as_json, std::ostream& out) {
  VerifyOptions options;
  options.n_max = n_max;
  if (perturb != 0.0)
    options.rho_closed_form = [perturb](const InterpolationConfig& cfg) {
      return sketch_residual_rho(cfg).rho * (1.0 + perturb);
    };
  const auto reports = run_verification(options);
  bool ok = true;
  json j = json::array();
  for (const auto& r : reports) {
    ok = ok && r.passed();
    if (as_json) {
      j.push_back({{"suite", r.name},
                   {"passed", r.passed()},
                   {"checks", r.checks},
                   {"seconds", r.seconds},
                   {"failures", r.failures}});
      continue;
    }
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks, "
        << fmt(r.seconds) << "s)\n";
    const std::size_t shown = std::min<std::size_t>(r.failures.size(), 25);
    for (std::size_t i = 0; i < shown; ++i) out << "  " << r.failures[i] << '\n';
    if (r.failures.size() > shown)
      out << "  ... and " << r.failures.size() - shown << " more\n";
  }
  if (as_json) out << j.dump(2) << '\n';
  return ok ? kOk : kVerificationFailed;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ','))
    seeds.push_back(parse_integer<std::uint64_t>(part, "--seed"));
  if (seeds.empty()) throw InvalidInput("--seed needs at least one value");
  return seeds;
}

std::vector<Index> parse_tau_list(const std::string& text) {
  std::vector<Index> taus;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto lo = parse_integer<Index>(text.substr(0, colon), "--taus");
    const auto hi = parse_integer<Index>(text.substr(colon + 1), "--taus");
    if (lo > hi) throw InvalidInput("--taus range is empty");
    for (Index t = lo; t <= hi; ++t) taus.push_back(t);
  } else {
    for (const auto& part : split(text, ',')) taus.push_back(parse_integer<Index>(part, "--taus"));
  }
  if (taus.empty()) throw InvalidInput("--taus needs at least one value");
  return taus;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<RunResult> run_seeds(const Dataset& data, const LossSpec& loss,
                                 const SolverConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                 const std::optional<Eigen::VectorXd>& x_star) {
  std::vector<RunResult> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      try {
        SolverConfig c = cfg;
        c.seed = seeds[i];
        results[i] = run(data, loss, c, x_star);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(seeds.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAGD solver, complexity planner and verification tool", "sagd"};
  app.require_subcommand(1);

  DataOptions data_opts;
  SolveOptions solve_opts;

  auto* plan = app.add_subcommand("plan", "Compute the optimal (q, tau) and the candidate table");
  add_data_options(*plan, data_opts);
  std::optional<Index> plan_n;
  std::optional<double> plan_L_max, plan_mu, plan_L_bar;
  plan->add_option("--n", plan_n, "Explicit profile: sample count");
  plan->add_option("--L-max", plan_L_max, "Explicit profile: largest smoothness constant");
  plan->add_option("--mu", plan_mu, "Explicit profile: strong convexity");
  plan->add_option("--L-bar", plan_L_bar, "Explicit profile: mean smoothness (default L_max)");
  bool plan_json_flag = false;
  plan->add_flag("--json", plan_json_flag, "Machine-readable output");

  auto add_solve = [&](CLI::App& cmd) {
    add_data_options(cmd, data_opts);
    cmd.add_option("--q", solve_opts.q, "Minibatch probability or auto");
    cmd.add_option("--alpha", solve_opts.alpha, "Stepsize or auto");
    cmd.add_option("--seed", solve_opts.seeds, "Seed list, comma separated");
    cmd.add_option("--tol", solve_opts.tol, "Target error ||x - x*||");
    cmd.add_option("--max-passes", solve_opts.max_passes, "Budget in effective passes");
    cmd.add_option("--check-every", solve_opts.check_every, "Checkpoint interval in passes");
    cmd.add_option("--table-init", solve_opts.table_init, "at-x0, zeros or random");
    cmd.add_option("--out", solve_opts.out, "Output CSV");
    cmd.add_flag("--json", solve_opts.json, "Machine-readable summary");
  };

  auto* run_cmd = app.add_subcommand("run", "Run the solver to tolerance for each seed");
  add_solve(*run_cmd);
  run_cmd->add_option("--tau", solve_opts.tau, "Minibatch size or auto");
  run_cmd->add_option("--plot", solve_opts.plot, "Output SVG of error curves");
  run_cmd->add_option("--plot-axis", solve_opts.plot_axis, "effective_passes or wall_seconds");
  run_cmd->add_flag("--lyapunov", solve_opts.lyapunov, "Record the Lyapunov function");

  auto* sweep = app.add_subcommand("sweep", "Median passes to tolerance over a range of tau");
  add_solve(*sweep);
  std::string taus_text;
  sweep->add_option("--tau,--taus", taus_text, "a:b or a,b,c (default 1:4tau*)");

  auto* verify = app.add_subcommand("verify", "Check closed forms against enumeration oracles");
  Index n_max = 8;
  double perturb = 0.0;
  bool verify_json = false;
  verify->add_option("--n-max", n_max, "Largest n of the oracle grids");
  verify->add_option("--perturb-rho", perturb, "")->group("");
  verify->add_flag("--json", verify_json, "Machine-readable output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }

  try {
    if (plan->parsed())
      return cmd_plan(data_opts, plan_n, plan_L_max, plan_mu, plan_L_bar, plan_json_flag, out);
    if (run_cmd->parsed()) return cmd_run(data_opts, solve_opts, out, err);
    if (sweep->parsed()) return cmd_sweep(data_opts, solve_opts, taus_text, out, err);
    return cmd_verify(n_max, perturb, verify_json, out);
  } catch (const ConvergenceFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

}  // namespace sagd::cli
