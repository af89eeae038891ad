#include "attackdet/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace attackdet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config: " + field + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where.empty() ? key : where + "." + key, "missing");
  return j.at(key);
}


double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

// A matrix is an array of rows, {"rows", "cols", "data"} in row-major order,
// or a scalar s meaning s * I of the size given by `square_dim`.
Eigen::MatrixXd matrix(const json& j, const std::string& field, Eigen::Index square_dim = -1) {
  if (j.is_number()) {
    if (square_dim < 0) fail(field, "a scalar is only accepted for square weights");
    return number(j, field) * Eigen::MatrixXd::Identity(square_dim, square_dim);
  }
  if (j.is_object()) {
    const auto rows = require(j, "rows", field).get<long>();
    const auto cols = require(j, "cols", field).get<long>();
    const auto& data = require(j, "data", field);
    if (rows < 0 || cols < 0) fail(field, "negative dimension");
    if (!data.is_array() || static_cast<long>(data.size()) != rows * cols)
      fail(field, "data must hold rows*cols numbers");
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c)
        m(r, c) = number(data[static_cast<std::size_t>(r * cols + c)], field + ".data");
    return m;
  }
  if (!j.is_array()) fail(field, "expected a matrix (array of rows or {rows, cols, data})");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const auto cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(field, "rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

Eigen::VectorXd vector(const json& j, const std::string& field) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, number(j, field));
  if (!j.is_array()) fail(field, "expected a number or an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k], field);
  return v;
}

std::vector<double> per_node(const json& j, int N, const std::string& field) {
  if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(N), number(j, field));
  if (!j.is_array() || static_cast<int>(j.size()) != N) fail(field, "expected a number or one number per node");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, field));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

AttackSignal parse_attack(const json& j, const std::string& field) {
  const auto type = require(j, "type", field).get<std::string>();
  if (type == "step")
    return attack::Step{vector(require(j, "amplitude", field), field + ".amplitude"),
                        number(require(j, "t_on", field), field + ".t_on"),
                        number(require(j, "t_off", field), field + ".t_off")};
  if (type == "biased")
    return attack::Biased{vector(require(j, "constant", field), field + ".constant"),
                          vector(require(j, "transient_amplitude", field), field + ".transient_amplitude"),
                          number(require(j, "decay_rate", field), field + ".decay_rate"),
                          number(require(j, "t_on", field), field + ".t_on")};
  if (type == "l2_pulse")
    return attack::L2Pulse{vector(require(j, "amplitude", field), field + ".amplitude"),
                           number(require(j, "t_on", field), field + ".t_on"),
                           number(require(j, "t_off", field), field + ".t_off")};
  fail(field + ".type", "unknown attack type '" + type + "' (step, biased, l2_pulse)");
}

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  const auto& plant = require(doc, "plant", "");
  s.models.plant.A = matrix(require(plant, "A", "plant"), "plant.A");
  const Eigen::Index n = s.models.plant.A.rows();
  s.models.plant.B = matrix(require(plant, "B", "plant"), "plant.B", n);
  s.models.consensus.H = matrix(require(require(doc, "consensus", ""), "H", "consensus"), "consensus.H", n);

  const auto& nodes = require(doc, "nodes", "");
  if (!nodes.is_array() || nodes.empty()) fail("nodes", "expected a non-empty array");
  const int N = static_cast<int>(nodes.size());
  for (int i = 0; i < N; ++i) {
    const std::string f = "nodes[" + std::to_string(i) + "]";
    const auto& nj = nodes[static_cast<std::size_t>(i)];
    NodeModel node;
    node.sensor.C = matrix(require(nj, "C", f), f + ".C");
    node.sensor.D = matrix(require(nj, "D", f), f + ".D");
    node.sensor.Dbar = matrix(require(nj, "Dbar", f), f + ".Dbar", node.sensor.C.rows());
    if (nj.contains("F")) {
      node.attack.F = matrix(nj.at("F"), f + ".F");
      if (node.attack.F.size() == 0) node.attack.F = Eigen::MatrixXd(n, 0);
    } else {
      node.attack.F = Eigen::MatrixXd(n, 0);
    }
    const int nf = static_cast<int>(node.attack.F.cols());
    if (nf == 0) {
      node.tracker = safe_tracker();
    } else {
      const auto& tj = require(nj, "tracker", f);
      const std::string tf = f + ".tracker";
      if (tj.contains("Omega")) {
        node.tracker.Omega = matrix(tj.at("Omega"), tf + ".Omega");
        node.tracker.Gamma = matrix(require(tj, "Gamma", tf), tf + ".Gamma");
        node.tracker.Upsilon = matrix(require(tj, "Upsilon", tf), tf + ".Upsilon");
      } else {
        try {
          node.tracker = build_tracker(number(require(tj, "beta", tf), tf + ".beta"),
                                       number(require(tj, "d", tf), tf + ".d"), nf);
        } catch (const std::invalid_argument& e) {
          fail(tf, e.what());
        }
      }
    }
    s.models.nodes.push_back(std::move(node));
  }

  const auto violations = validate(s.models);
  if (!violations.empty()) {
    std::string msg = "model validation failed:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw ConfigError(msg);
  }

  const auto& gj = require(doc, "graph", "");
  std::vector<DirectedGraph::Edge> edges;
  const auto& ej = require(gj, "edges", "graph");
  if (!ej.is_array()) fail("graph.edges", "expected an array of [from, to] pairs");
  for (const auto& e : ej) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      fail("graph.edges", "expected [from, to] integer pairs");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  if (gj.contains("nodes") && gj.at("nodes").get<int>() != N) fail("graph.nodes", "does not match the number of nodes");
  try {
    s.graph = DirectedGraph(N, edges);
  } catch (const std::invalid_argument& e) {
    fail("graph.edges", e.what());
  }

  const json syn = doc.value("synthesis", json::object());
  const double gamma_sq = syn.contains("gamma_sq") ? number(syn.at("gamma_sq"), "synthesis.gamma_sq") : 0.5;
  s.params = default_params(s.models, s.graph, gamma_sq, 1.0);
  s.params.weights_defaulted = true;
  if (syn.contains("alpha")) s.params.alpha = per_node(syn.at("alpha"), N, "synthesis.alpha");
  s.params.pi = default_pi(s.params.alpha, degrees(s.graph).out);
  if (syn.contains("pi")) s.params.pi = per_node(syn.at("pi"), N, "synthesis.pi");
  auto weights = [&](const char* key, std::vector<Eigen::MatrixXd>& out, bool on_tracker) {
    if (!syn.contains(key)) return;
    s.params.weights_defaulted = false;
    const auto& w = syn.at(key);
    for (int i = 0; i < N; ++i) {
      const auto& node = s.models.nodes[static_cast<std::size_t>(i)];
      const Eigen::Index dim = on_tracker ? node.tracker.dim() : n;
      const std::string field = std::string("synthesis.") + key;
      // one entry per node unless w itself is an array of rows
      const bool listed = w.is_array() && !w.empty() && (!w[0].is_array() || (!w[0].empty() && w[0][0].is_array()));
      if (listed && static_cast<int>(w.size()) != N) fail(field, "expected one weight per node");
      out[static_cast<std::size_t>(i)] = matrix(listed ? w[static_cast<std::size_t>(i)] : w, field, dim);
    }
  };
  weights("Qtilde", s.params.Qtilde, false);
  weights("Qcheck", s.params.Qcheck, true);
  if (syn.contains("margin")) s.params.margin = number(syn.at("margin"), "synthesis.margin");
  if (syn.contains("tolerance")) s.params.tolerance = number(syn.at("tolerance"), "synthesis.tolerance");
  if (syn.contains("budget")) s.params.budget = syn.at("budget").get<long>();
  if (syn.contains("injection_rate_bound"))
    s.params.injection_rate_bound = number(syn.at("injection_rate_bound"), "synthesis.injection_rate_bound");

  const json sim = doc.value("simulation", json::object());
  auto& c = s.simulation;
  if (sim.contains("dt")) c.dt = number(sim.at("dt"), "simulation.dt");
  if (sim.contains("horizon")) c.horizon = number(sim.at("horizon"), "simulation.horizon");
  if (sim.contains("seed")) c.seed = sim.at("seed").get<std::uint64_t>();
  if (sim.contains("x0")) c.x0 = vector(sim.at("x0"), "simulation.x0");
  if (sim.contains("x0_scale")) c.x0_scale = number(sim.at("x0_scale"), "simulation.x0_scale");
  if (sim.contains("process_noise")) c.process_noise = number(sim.at("process_noise"), "simulation.process_noise");
  if (sim.contains("measurement_noise"))
    c.measurement_noise = per_node(sim.at("measurement_noise"), N, "simulation.measurement_noise");
  if (sim.contains("noise_cutoff")) c.noise_cutoff = number(sim.at("noise_cutoff"), "simulation.noise_cutoff");
  if (sim.contains("output_stride")) c.output_stride = sim.at("output_stride").get<int>();

  c.attacks.clear();
  for (const auto& node : s.models.nodes) c.attacks.push_back(attack::Zero{node.attack.F.cols()});
  if (doc.contains("attacks")) {
    const auto& aj = doc.at("attacks");
    if (!aj.is_array()) fail("attacks", "expected an array");
    for (std::size_t k = 0; k < aj.size(); ++k) {
      const std::string f = "attacks[" + std::to_string(k) + "]";
      const auto& node_j = require(aj[k], "node", f);
      if (!node_j.is_number_integer()) fail(f + ".node", "expected an integer");
      const int node = node_j.get<int>();
      if (node < 1 || node > N) fail(f + ".node", "node " + std::to_string(node) + " does not exist");
      c.attacks[static_cast<std::size_t>(node - 1)] = parse_attack(aj[k], f);
    }
  }
  try {
    check_config(c, s.models);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const json out = doc.value("outputs", json::object());
  s.outputs.gains = out.value("gains", s.outputs.gains);
  s.outputs.csv = out.value("csv", s.outputs.csv);
  s.outputs.svg = out.value("svg", s.outputs.svg);
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario paper_scenario(double noise_intensity) {
  Scenario s;
  const int n = 6, N = 6;
  Eigen::MatrixXd A(n, n);
  A << 0.3775, 0, 0, 0, 0, 0,
       0.2959, 0.3510, 0, 0, 0, 0,
       1.4751, 0.6232, 1.0078, 0, 0, 0,
       0.2340, 0, 0, 0.5596, 0, 0,
       0, 0, 0, 0.4437, 1.1878, -0.0215,
       0, 0, 0, 0, 2.2023, 1.0039;
  s.models.plant.A = A;
  s.models.plant.B = 0.1 * Eigen::MatrixXd::Identity(n, n);
  s.models.consensus.H = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < N; ++i) {
    NodeModel node;
    node.sensor.C = Eigen::MatrixXd::Zero(2, n);
    node.sensor.C(0, i) = 1.0;
    node.sensor.C(1, (i + 1) % n) = 1.0;
    node.sensor.D = Eigen::MatrixXd::Zero(2, n);
    node.sensor.Dbar = 0.01 * Eigen::MatrixXd::Identity(2, 2);
    node.attack.F = Eigen::MatrixXd::Ones(n, 1);
    node.tracker = build_tracker(10.0, 1.0, 1);
    s.models.nodes.push_back(std::move(node));
  }
  s.graph = DirectedGraph(N, {{6, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  s.params = default_params(s.models, s.graph, 0.5, 2.0);
  s.params.pi.assign(static_cast<std::size_t>(N), 2.0);
  s.params.weights_defaulted = false;
  // keeps the fastest error mode near -300 so RK4 at dt = 1e-3 stays accurate
  s.params.injection_rate_bound = 300.0;

  auto& c = s.simulation;
  c.dt = 1e-3;
  c.horizon = 20.0;
  c.seed = 1;
  c.x0_scale = 1.0;
  c.process_noise = noise_intensity;
  c.measurement_noise.assign(static_cast<std::size_t>(N), noise_intensity);
  for (int i = 0; i < N; ++i) c.attacks.push_back(attack::Zero{1});
  c.attacks[1] = attack::Step{Eigen::VectorXd::Constant(1, 5.0), 2.0, 7.0};
  return s;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: syntax error: ") + e.what());
  }
  try {
    return scenario_from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string gains_to_json(const SynthesisSolution& sol) {
  json nodes = json::array();
  for (const auto& g : sol.nodes)
    nodes.push_back({{"X", matrix_json(g.X)},           {"M", matrix_json(g.M)},
                     {"L_aug", matrix_json(g.L_aug)},   {"K_aug", matrix_json(g.K_aug)},
                     {"L", matrix_json(g.L)},           {"K", matrix_json(g.K)},
                     {"Lbar", matrix_json(g.Lbar)},     {"Kbar", matrix_json(g.Kbar)},
                     {"Lcheck", matrix_json(g.Lcheck)}, {"Kcheck", matrix_json(g.Kcheck)},
                     {"Q", matrix_json(g.Q)},           {"Qbar", matrix_json(g.Qbar)}});
  json doc = {{"gamma_sq", sol.gamma_sq}, {"margin", sol.margin},     {"rho", sol.rho},
              {"alpha", sol.alpha},       {"pi", sol.pi},             {"weights_defaulted", sol.weights_defaulted},
              {"P", matrix_json(sol.P)},  {"nodes", nodes}};
  return doc.dump(2) + "\n";
}

SynthesisSolution gains_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("gains: syntax error: ") + e.what());
  }
  try {
    SynthesisSolution sol;
    sol.gamma_sq = doc.at("gamma_sq").get<double>();
    sol.margin = doc.at("margin").get<double>();
    sol.rho = doc.at("rho").get<double>();
    sol.alpha = doc.at("alpha").get<std::vector<double>>();
    sol.pi = doc.at("pi").get<std::vector<double>>();
    sol.weights_defaulted = doc.value("weights_defaulted", false);
    sol.P = matrix(doc.at("P"), "gains.P");
    const auto& nodes = doc.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string f = "gains.nodes[" + std::to_string(i) + "]";
      const auto& nj = nodes[i];
      NodeGains g;
      g.X = matrix(nj.at("X"), f + ".X");
      g.M = matrix(nj.at("M"), f + ".M");
      g.L_aug = matrix(nj.at("L_aug"), f + ".L_aug");
      g.K_aug = matrix(nj.at("K_aug"), f + ".K_aug");
      g.L = matrix(nj.at("L"), f + ".L");
      g.K = matrix(nj.at("K"), f + ".K");
      g.Q = matrix(nj.at("Q"), f + ".Q");
      g.Qbar = matrix(nj.at("Qbar"), f + ".Qbar");
      const Eigen::Index n = g.L.rows();
      if (g.L_aug.rows() < n || g.K_aug.rows() != g.L_aug.rows() || g.L_aug.cols() != g.L.cols() ||
          g.K_aug.cols() != g.K.cols() || g.K.rows() != n)
        fail(f, "inconsistent gain dimensions");
      const Eigen::Index k = g.L_aug.rows() - n;
      g.Ltilde = g.L_aug.topRows(n);
      g.Ktilde = g.K_aug.topRows(n);
      g.Lcheck = g.L_aug.bottomRows(k);
      g.Kcheck = g.K_aug.bottomRows(k);
      g.Lbar = g.Ltilde - g.L;
      g.Kbar = g.Ktilde - g.K;
      sol.nodes.push_back(std::move(g));
    }
    if (sol.alpha.size() != sol.nodes.size() || sol.pi.size() != sol.nodes.size())
      fail("gains", "alpha and pi need one entry per node");
    return sol;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("gains: ") + e.what());
  }
}

void write_gains(const std::string& path, const SynthesisSolution& solution) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << gains_to_json(solution);
  if (!out) throw ConfigError("cannot write '" + path + "'");
}

SynthesisSolution read_gains(const std::string& path) { return gains_from_json(read_file(path)); }

void check_gains(const SynthesisSolution& sol, const ModelSet& models) {
  if (static_cast<int>(sol.nodes.size()) != models.node_count())
    throw ConfigError("gains: " + std::to_string(sol.nodes.size()) + " nodes, model has " +
                      std::to_string(models.node_count()));
  const Eigen::Index n = models.n();
  const Eigen::Index h = models.consensus.H.rows();
  for (int i = 0; i < models.node_count(); ++i) {
    const auto& g = sol.nodes[static_cast<std::size_t>(i)];
    const auto& node = models.nodes[static_cast<std::size_t>(i)];
    const Eigen::Index mi = node.sensor.C.rows();
    const Eigen::Index k = node.tracker.dim();
    const bool ok = g.L.rows() == n && g.L.cols() == mi && g.K.rows() == n && g.K.cols() == h &&
                    g.Lcheck.rows() == k && g.Kcheck.rows() == k && g.X.rows() == n + k && g.X.cols() == n + k &&
                    g.Q.rows() == k && g.Qbar.rows() == n;
    if (!ok) throw ConfigError("gains: node " + std::to_string(i + 1) + " does not match the model dimensions");
  }
  if (sol.P.rows() != n || sol.P.cols() != n) throw ConfigError("gains: P does not match the plant dimension");
}

}  // namespace attackdet
