// attackdet: synthesize, analyze and simulate distributed attack detectors.
//
// Exit codes: 0 success, 1 input or validation error, 2 synthesis or
// verification failure, 3 simulation divergence.

#include "attackdet/detectability.hpp"
#include "attackdet/report.hpp"
#include "attackdet/scenario.hpp"
#include "attackdet/simulator.hpp"
#include "attackdet/synthesis.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

using namespace attackdet;

namespace {

constexpr int kInputError = 1;
constexpr int kSynthesisError = 2;
constexpr int kDiverged = 3;

struct Options {
  std::string config;
  std::string gains;
  std::string out;
  std::string csv;
  std::string columns;
  std::string iterate_log;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, horizon, margin;
  std::optional<long> budget;
  double threshold = 1.0;
  double noise = 1.0;
};

Scenario load(const Options& o) {
  Scenario s = o.config.empty() ? paper_scenario() : load_scenario(o.config);
  if (o.seed) s.simulation.seed = *o.seed;
  if (o.dt) s.simulation.dt = *o.dt;
  if (o.horizon) s.simulation.horizon = *o.horizon;
  if (o.margin) s.params.margin = *o.margin;
  if (o.budget) s.params.budget = *o.budget;
  try {
    check_config(s.simulation, s.models);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return s;
}

std::string g(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void print_verification(const VerificationReport& rep) {
  std::cout << "margin " << g(rep.margin) << ", tolerance " << g(rep.tolerance) << "\n";
  std::cout << "node  lmi lambda_max  X lambda_min  Q lambda_min  Qbar lambda_min\n";
  for (std::size_t i = 0; i < rep.lmi_lambda_max.size(); ++i)
    std::cout << std::left << std::setw(6) << i + 1 << std::setw(16) << g(rep.lmi_lambda_max[i]) << std::setw(14)
              << g(rep.x_lambda_min[i]) << std::setw(14) << g(rep.q_lambda_min[i]) << g(rep.qbar_lambda_min[i])
              << "\n";
  std::cout << "closed-loop spectral abscissa " << g(rep.abscissa) << ", rho " << g(rep.rho) << "\n";
  std::cout << "lmis " << (rep.lmis_ok ? "ok" : "FAILED") << ", X " << (rep.x_ok ? "ok" : "FAILED") << ", stability "
            << (rep.stable ? "ok" : "FAILED") << ", weights " << (rep.weights_ok ? "ok" : "FAILED") << ", gains "
            << (rep.gains_consistent ? "consistent" : "INCONSISTENT with X, M") << "\n";
}

int synth(const Scenario& s, const std::string& gains_path, const std::string& log_path) {
  std::ofstream log_file;
  IterateLog log;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw ConfigError("cannot write '" + log_path + "'");
    log = IterateCsvWriter(log_file);
  }
  const auto sol = synthesize(s.models, s.graph, s.params, std::nullopt, log);
  const auto rep = verify_solution(sol, s.models, s.graph, s.params);
  std::cout << "solver: " << sol.solver.iterations << " iterations, " << sol.solver.smoothing_restarts
            << " smoothing restarts, merit " << g(sol.solver.merit) << "\n";
  if (s.params.weights_defaulted) std::cout << "note: weights Qtilde, Qcheck defaulted to 1e-3 I\n";
  print_verification(rep);
  write_gains(gains_path, sol);
  std::cout << "gains written to " << gains_path << "\n";
  return rep.passed() ? 0 : kSynthesisError;
}

Trajectory simulate(const Scenario& s, const SynthesisSolution& sol, const std::string& csv_path) {
  check_gains(sol, s.models);
  NetworkSystem sys(s.models, s.graph, detector_gains(sol));
  auto traj = run(s.simulation, sys);
  write_trajectory_csv(csv_path, traj);
  print_summary(std::cout, summarize(traj, s.simulation.attacks));
  std::cout << "trajectory written to " << csv_path << "\n";
  return traj;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::string> residual_columns(const CsvTable& t) {
  std::vector<std::string> out;
  for (int i = 1; t.find("rnorm" + std::to_string(i)) >= 0; ++i) out.push_back("rnorm" + std::to_string(i));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

int plot(const std::string& csv, const std::string& svg, const std::string& columns) {
  const auto table = read_csv(csv);
  auto cols = columns.empty() ? residual_columns(table) : split(columns);
  if (columns.empty() && cols.empty()) throw std::invalid_argument("plot: no columns selected and no rnorm<i> columns");
  write_text(svg, render_svg(table, cols, columns.empty() ? "residual norms" : ""));
  std::cout << "plot written to " << svg << "\n";
  return 0;
}

int flag(const std::string& csv, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("flag: threshold must be non-negative");
  const auto intervals = flag_residuals(read_csv(csv), threshold);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    std::cout << "node " << i + 1 << ":";
    if (intervals[i].empty()) std::cout << " none";
    for (const auto& iv : intervals[i]) std::cout << " [" << g(iv.start) << ", " << g(iv.end) << "]";
    std::cout << "\n";
  }
  return 0;
}

int detectability(const Scenario& s) {
  const auto rep = check_detectability(network_matrices(s.models, s.graph));
  auto list = [](const std::vector<std::complex<double>>& v) {
    std::string out;
    for (const auto& c : v) out += " " + g(c.real()) + (c.imag() >= 0 ? "+" : "") + g(c.imag()) + "i";
    return out;
  };
  std::cout << "(i)   (Abar, [Cbar; Hbar]) detectable: " << (rep.cond_i ? "yes" : "no") << list(rep.failing_i) << "\n";
  std::cout << "(ii)  (Omegabar, Fbar) detectable:     " << (rep.cond_ii ? "yes" : "no") << list(rep.failing_ii)
            << "\n";
  std::cout << "(iii) eigenspace intersection trivial: " << (rep.cond_iii ? "yes" : "no") << list(rep.failing_iii)
            << "\n";
  if (rep.defective_tracker) std::cout << "note: tracker eigenvalue with geometric < algebraic multiplicity\n";
  std::cout << "attack detectable: " << (rep.detectable ? "yes" : "no") << "; direct PBH test: "
            << (rep.direct ? "yes" : "no") << (rep.agrees() ? "" : " (DISAGREE)") << "\n";
  return rep.detectable ? 0 : kSynthesisError;
}

int verify(const Scenario& s, const std::string& gains_path) {
  const auto sol = read_gains(gains_path);
  check_gains(sol, s.models);
  SynthesisParams p = s.params;
  p.gamma_sq = sol.gamma_sq;
  p.alpha = sol.alpha;
  p.pi = sol.pi;
  for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
    // the file stores the shifted weights; recover the base weights
    const double shift = sol.rho * lambda_extremes(sol.nodes[i].X).lambda_min;
    p.Qtilde[i] = sol.nodes[i].Qbar - shift * Eigen::MatrixXd::Identity(sol.nodes[i].Qbar.rows(), sol.nodes[i].Qbar.cols());
    p.Qcheck[i] = sol.nodes[i].Q - shift * Eigen::MatrixXd::Identity(sol.nodes[i].Q.rows(), sol.nodes[i].Q.cols());
  }
  const auto rep = verify_solution(sol, s.models, s.graph, p);
  print_verification(rep);
  return rep.passed() ? 0 : kSynthesisError;
}

int demo(const Options& o) {
  namespace fs = std::filesystem;
  const fs::path dir = o.out.empty() ? fs::path("demo-paper") : fs::path(o.out);
  fs::create_directories(dir);
  Scenario s = paper_scenario(o.noise);
  if (o.seed) s.simulation.seed = *o.seed;
  const std::string gains = (dir / "gains.json").string();
  const std::string csv = (dir / "trajectory.csv").string();
  const std::string svg = (dir / "residuals.svg").string();
  std::cout << "== synth\n";
  if (int rc = synth(s, gains, ""); rc != 0) return rc;
  std::cout << "== simulate\n";
  simulate(s, read_gains(gains), csv);
  std::cout << "== plot\n";
  plot(csv, svg, "");
  std::cout << "== flag (threshold " << g(o.threshold) << ")\n";
  return flag(csv, o.threshold);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed attack detector synthesis, analysis and simulation"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Scenario JSON (built-in six-node ring example when omitted)");
  };
  auto add_sim = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Noise and initial-state seed");
    c->add_option("--dt", o.dt, "Integration step");
    c->add_option("--horizon", o.horizon, "Simulated time");
  };

  auto* synth_cmd = app.add_subcommand("synth", "Solve the coupled LMIs and write the gains file");
  add_config(synth_cmd);
  synth_cmd->add_option("--out", o.out, "Gains file")->default_val("gains.json");
  synth_cmd->add_option("--margin", o.margin, "Strict-feasibility margin");
  synth_cmd->add_option("--budget", o.budget, "Solver iteration budget");
  synth_cmd->add_option("--iterate-log", o.iterate_log, "Write solver iterates as CSV");

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate plant, observers and detectors");
  add_config(sim_cmd);
  add_sim(sim_cmd);
  sim_cmd->add_option("--gains", o.gains, "Gains file from synth")->required();
  sim_cmd->add_option("--out", o.out, "Trajectory CSV")->default_val("trajectory.csv");

  auto* plot_cmd = app.add_subcommand("plot", "Render CSV columns as an SVG line chart");
  plot_cmd->add_option("csv", o.csv, "Trajectory CSV")->required();
  plot_cmd->add_option("--out", o.out, "SVG file")->default_val("plot.svg");
  plot_cmd->add_option("--columns", o.columns, "Comma-separated column names (default: rnorm<i>)");

  auto* flag_cmd = app.add_subcommand("flag", "Report intervals where residual norms reach a threshold");
  flag_cmd->add_option("csv", o.csv, "Trajectory CSV")->required();
  flag_cmd->add_option("--threshold", o.threshold, "Residual-norm threshold")->default_val(1.0);

  auto* det_cmd = app.add_subcommand("detectability", "Check attack detectability of the network");
  add_config(det_cmd);

  auto* demo_cmd = app.add_subcommand("demo-paper", "Run synth, simulate, plot and flag on the built-in example");
  demo_cmd->add_option("--out", o.out, "Output directory")->default_val("demo-paper");
  demo_cmd->add_option("--seed", o.seed, "Noise and initial-state seed");
  demo_cmd->add_option("--noise", o.noise, "Noise intensity")->default_val(1.0);
  demo_cmd->add_option("--threshold", o.threshold, "Residual-norm threshold")->default_val(3.0);

  auto* verify_cmd = app.add_subcommand("verify", "Re-verify a gains file against the scenario");
  add_config(verify_cmd);
  verify_cmd->add_option("--gains", o.gains, "Gains file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*synth_cmd) return synth(load(o), o.out, o.iterate_log);
    if (*sim_cmd) {
      const Scenario s = load(o);
      simulate(s, read_gains(o.gains), o.out);
      return 0;
    }
    if (*plot_cmd) return plot(o.csv, o.out, o.columns);
    if (*flag_cmd) return flag(o.csv, o.threshold);
    if (*det_cmd) return detectability(load(o));
    if (*demo_cmd) return demo(o);
    if (*verify_cmd) return verify(load(o), o.gains);
  } catch (const SynthesisError& e) {
    std::cerr << "error: " << e.what() << " (best merit " << g(e.best_merit()) << ")\n";
    return kSynthesisError;
  } catch (const SimulationDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
