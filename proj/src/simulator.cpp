#include "attackdet/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace attackdet {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::VectorXd attack_value(const std::vector<AttackSignal>& attacks, int i, Eigen::Index dim, double t,
                             bool left) {
  if (attacks.empty()) return Eigen::VectorXd::Zero(dim);
  const auto& a = attacks[static_cast<std::size_t>(i)];
  return left ? evaluate_attack_left(a, t) : evaluate_attack(a, t);
}

std::int64_t step_count(const SimulationConfig& c) { return std::llround(c.horizon / c.dt); }

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

}  // namespace

DetectorGains detector_gains(const SynthesisSolution& solution) {
  DetectorGains out;
  for (const auto& n : solution.nodes) out.push_back({n.L, n.K, n.Lbar, n.Kbar, n.Lcheck, n.Kcheck});
  return out;
}

StateLayout::StateLayout(const ModelSet& models) : n_(models.n()) {
  const int N = models.node_count();
  Eigen::Index off = n_ * (1 + 2 * N);
  for (const auto& node : models.nodes) {
    eps_offset_.push_back(off);
    eps_dim_.push_back(node.tracker.dim());
    off += node.tracker.dim();
  }
  size_ = off;
}

Inputs zero_inputs(const ModelSet& models) {
  Inputs in;
  in.xi = Eigen::VectorXd::Zero(models.plant.m());
  for (const auto& node : models.nodes) {
    in.xi_node.push_back(Eigen::VectorXd::Zero(node.sensor.Dbar.cols()));
    in.f.push_back(Eigen::VectorXd::Zero(node.attack.F.cols()));
  }
  return in;
}

NetworkSystem::NetworkSystem(ModelSet models, DirectedGraph graph, DetectorGains gains)
    : models_(std::move(models)), graph_(std::move(graph)), gains_(std::move(gains)), layout_(models_) {
  const int N = models_.node_count();
  if (graph_.node_count() != N) throw std::invalid_argument("NetworkSystem: graph and model node counts differ");
  if (static_cast<int>(gains_.size()) != N) throw std::invalid_argument("NetworkSystem: one gain set per node required");
  const Eigen::Index n = models_.n();
  const Eigen::Index h = models_.consensus.H.rows();
  for (int i = 0; i < N; ++i) {
    const auto& node = models_.nodes[static_cast<std::size_t>(i)];
    const auto& g = gains_[static_cast<std::size_t>(i)];
    const Eigen::Index mi = node.sensor.C.rows();
    const Eigen::Index k = node.tracker.dim();
    auto need = [&](const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* name) {
      if (m.rows() != r || m.cols() != c)
        throw std::invalid_argument("NetworkSystem: gain " + std::string(name) + " of node " + std::to_string(i + 1) +
                                    " has the wrong shape");
    };
    need(g.L, n, mi, "L");
    need(g.K, n, h, "K");
    need(g.Lbar, n, mi, "Lbar");
    need(g.Kbar, n, h, "Kbar");
    need(g.Lcheck, k, mi, "Lcheck");
    need(g.Kcheck, k, h, "Kcheck");
    std::vector<int> nb;
    for (int j : in_neighbors(graph_, i + 1)) nb.push_back(j - 1);
    neighbors_.push_back(std::move(nb));
  }
}

Eigen::VectorXd NetworkSystem::zeta(const Eigen::VectorXd& state, const Inputs& in, int i) const {
  const auto& s = models_.nodes[static_cast<std::size_t>(i)].sensor;
  const auto x = state.segment(layout_.x(), layout_.n());
  const auto xh = state.segment(layout_.xhat(i), layout_.n());
  return s.C * (x - xh) + s.D * in.xi + s.Dbar * in.xi_node[static_cast<std::size_t>(i)];
}

Eigen::VectorXd NetworkSystem::zetabar(const Eigen::VectorXd& state, int i) const {
  const Eigen::Index n = layout_.n();
  const auto& H = models_.consensus.H;
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(n);
  const auto xi = state.segment(layout_.xhat(i), n);
  for (int j : neighbors(i)) diff += state.segment(layout_.xhat(j), n) - xi;
  return H * diff;
}

Eigen::VectorXd NetworkSystem::derivative(const Eigen::VectorXd& state, const Inputs& in) const {
  if (state.size() != layout_.size()) throw std::invalid_argument("derivative: state has the wrong length");
  const Eigen::Index n = layout_.n();
  const auto& A = models_.plant.A;
  const auto& H = models_.consensus.H;
  Eigen::VectorXd out(state.size());
  out.segment(layout_.x(), n) = A * state.segment(layout_.x(), n) + models_.plant.B * in.xi;

  for (int i = 0; i < layout_.node_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto& node = models_.nodes[ui];
    const auto& g = gains_[ui];
    const auto& C = node.sensor.C;
    const auto xh = state.segment(layout_.xhat(i), n);
    const auto eh = state.segment(layout_.ehat(i), n);
    const auto ep = state.segment(layout_.epshat(i), layout_.eps_dim(i));

    const Eigen::VectorXd z = zeta(state, in, i);
    const Eigen::VectorXd zb = zetabar(state, i);
    Eigen::VectorXd ediff = Eigen::VectorXd::Zero(n);
    for (int j : neighbors(i)) ediff += state.segment(layout_.ehat(j), n) - eh;
    const Eigen::VectorXd se = H * ediff;
    const Eigen::VectorXd innov = z - C * eh;
    const Eigen::VectorXd cons = zb + se;

    Eigen::VectorXd dxh = A * xh + g.L * z + g.K * zb;
    if (node.attack.F.cols() > 0) dxh += node.attack.F * in.f[ui];
    out.segment(layout_.xhat(i), n) = dxh;

    Eigen::VectorXd deh = A * eh - g.L * (C * eh) + g.K * se + g.Lbar * innov + g.Kbar * cons;
    if (layout_.eps_dim(i) > 0) {
      deh -= node.attack.F * (node.tracker.Upsilon * ep);
      out.segment(layout_.epshat(i), layout_.eps_dim(i)) = node.tracker.Omega * ep + g.Lcheck * innov + g.Kcheck * cons;
    }
    out.segment(layout_.ehat(i), n) = deh;
  }
  return out;
}

Eigen::VectorXd derivative(const NetworkSystem& system, const Eigen::VectorXd& state, const Inputs& in) {
  return system.derivative(state, in);
}

void check_config(const SimulationConfig& c, const ModelSet& models) {
  const int N = models.node_count();
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw std::invalid_argument("simulation: dt must be positive");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw std::invalid_argument("simulation: horizon must be positive");
  const auto steps = step_count(c);
  if (steps < 1 || std::abs(static_cast<double>(steps) * c.dt - c.horizon) > 1e-9 * c.horizon)
    throw std::invalid_argument("simulation: horizon must be an integer multiple of dt");
  if (c.output_stride < 1) throw std::invalid_argument("simulation: output_stride must be >= 1");
  if (c.x0 && c.x0->size() != models.n()) throw std::invalid_argument("simulation: x0 has the wrong length");
  if (!(c.x0_scale >= 0.0)) throw std::invalid_argument("simulation: x0_scale must be non-negative");
  if (!(c.process_noise >= 0.0)) throw std::invalid_argument("simulation: noise intensity must be non-negative");
  if (!c.measurement_noise.empty()) {
    if (static_cast<int>(c.measurement_noise.size()) != N)
      throw std::invalid_argument("simulation: one measurement noise intensity per node required");
    for (double v : c.measurement_noise)
      if (!(v >= 0.0)) throw std::invalid_argument("simulation: noise intensity must be non-negative");
  }
  if (!c.attacks.empty()) {
    if (static_cast<int>(c.attacks.size()) != N) throw std::invalid_argument("simulation: one attack per node required");
    for (int i = 0; i < N; ++i) {
      const auto& a = c.attacks[static_cast<std::size_t>(i)];
      check_attack(a);
      if (attack_dim(a) != models.nodes[static_cast<std::size_t>(i)].attack.F.cols())
        throw std::invalid_argument("simulation: attack on node " + std::to_string(i + 1) +
                                    " does not match the columns of F");
    }
  }
}

Eigen::VectorXd initial_state(const SimulationConfig& c, Eigen::Index n) {
  if (c.x0) return *c.x0;
  std::mt19937_64 rng(derive_seed(c.seed, 0xffffffffu));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = c.x0_scale * normal(rng);
  return x;
}

Trajectory run(const SimulationConfig& c, const NetworkSystem& sys) {
  const auto& models = sys.models();
  check_config(c, models);
  const auto& lay = sys.layout();
  const int N = lay.node_count();
  const auto steps = step_count(c);
  const double cutoff = c.noise_cutoff.value_or(c.horizon);

  NoiseProcess proc{c.process_noise, derive_seed(c.seed, 0), cutoff};
  std::vector<NoiseProcess> meas;
  for (int i = 0; i < N; ++i)
    meas.push_back({c.measurement_noise.empty() ? 0.0 : c.measurement_noise[static_cast<std::size_t>(i)],
                    derive_seed(c.seed, static_cast<std::uint32_t>(i + 1)), cutoff});

  auto noise_at = [&](std::int64_t k) {
    Inputs in = zero_inputs(models);
    in.xi = sample_noise(proc, k, c.dt, models.plant.m());
    for (int i = 0; i < N; ++i)
      in.xi_node[static_cast<std::size_t>(i)] =
          sample_noise(meas[static_cast<std::size_t>(i)], k, c.dt, models.nodes[static_cast<std::size_t>(i)].sensor.Dbar.cols());
    return in;
  };
  auto set_attack = [&](Inputs& in, double t, bool left) {
    for (int i = 0; i < N; ++i)
      in.f[static_cast<std::size_t>(i)] =
          attack_value(c.attacks, i, models.nodes[static_cast<std::size_t>(i)].attack.F.cols(), t, left);
  };

  Trajectory traj;
  traj.layout = lay;
  traj.dt = c.dt;
  traj.output_stride = c.output_stride;
  traj.x0 = initial_state(c, models.n());

  Eigen::VectorXd state = Eigen::VectorXd::Zero(lay.size());
  state.segment(lay.x(), lay.n()) = traj.x0;
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(N);

  auto record = [&](std::int64_t k, Inputs in) {
    Sample s;
    s.t = static_cast<double>(k) * c.dt;
    s.step = k;
    s.state = state;
    for (int i = 0; i < N; ++i) {
      const auto& node = models.nodes[static_cast<std::size_t>(i)];
      s.residual.push_back(node.tracker.Upsilon * state.segment(lay.epshat(i), lay.eps_dim(i)));
      s.corrected.push_back(state.segment(lay.xhat(i), lay.n()) + state.segment(lay.ehat(i), lay.n()));
      s.zeta.push_back(sys.zeta(state, in, i));
      s.zetabar.push_back(sys.zetabar(state, i));
    }
    s.inputs = std::move(in);
    s.disturbance_energy = energy;
    traj.samples.push_back(std::move(s));
  };

  for (std::int64_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * c.dt;
    Inputs in = noise_at(k);
    set_attack(in, t, false);
    if (k % c.output_stride == 0 || k == steps) record(k, in);
    if (k == steps) break;

    const Eigen::VectorXd k1 = sys.derivative(state, in);
    set_attack(in, t + 0.5 * c.dt, false);
    const Eigen::VectorXd k2 = sys.derivative(state + 0.5 * c.dt * k1, in);
    const Eigen::VectorXd k3 = sys.derivative(state + 0.5 * c.dt * k2, in);
    set_attack(in, t + c.dt, true);
    const Eigen::VectorXd k4 = sys.derivative(state + c.dt * k3, in);
    state += (c.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double xi2 = in.xi.squaredNorm();
    for (int i = 0; i < N; ++i) energy(i) += c.dt * (xi2 + in.xi_node[static_cast<std::size_t>(i)].squaredNorm());

    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > 1e150) throw SimulationDiverged(t + c.dt);
  }
  return traj;
}

TrackerTruth simulate_tracker_truth(const SimulationConfig& c, const ModelSet& models, const Trajectory& traj) {
  const int N = models.node_count();
  std::vector<Eigen::MatrixXd> M;
  std::vector<Eigen::VectorXd> eps;
  for (const auto& node : models.nodes) {
    M.push_back(node.tracker.dim() > 0 ? tracker_closed_loop(node.tracker) : Eigen::MatrixXd());
    eps.push_back(Eigen::VectorXd::Zero(node.tracker.dim()));
  }
  auto rhs = [&](int i, const Eigen::VectorXd& e, double t, bool left) -> Eigen::VectorXd {
    const auto& node = models.nodes[static_cast<std::size_t>(i)];
    const Eigen::VectorXd f = attack_value(c.attacks, i, node.attack.F.cols(), t, left);
    return M[static_cast<std::size_t>(i)] * e - node.tracker.Gamma * f;
  };

  TrackerTruth out;
  std::int64_t k = 0;
  for (const auto& s : traj.samples) {
    for (; k < s.step; ++k) {
      const double t = static_cast<double>(k) * c.dt;
      for (int i = 0; i < N; ++i) {
        auto& e = eps[static_cast<std::size_t>(i)];
        if (e.size() == 0) continue;
        const Eigen::VectorXd k1 = rhs(i, e, t, false);
        const Eigen::VectorXd k2 = rhs(i, e + 0.5 * c.dt * k1, t + 0.5 * c.dt, false);
        const Eigen::VectorXd k3 = rhs(i, e + 0.5 * c.dt * k2, t + 0.5 * c.dt, false);
        const Eigen::VectorXd k4 = rhs(i, e + c.dt * k3, t + c.dt, true);
        e += (c.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    std::vector<Eigen::VectorXd> nu;
    for (int i = 0; i < N; ++i) {
      const auto& node = models.nodes[static_cast<std::size_t>(i)];
      const auto& e = eps[static_cast<std::size_t>(i)];
      nu.push_back(node.tracker.Upsilon * e - s.inputs.f[static_cast<std::size_t>(i)]);
    }
    out.eps.push_back(eps);
    out.nu.push_back(std::move(nu));
  }
  return out;
}

Eigen::VectorXd augmented_error_derivative(const AugmentedNodeMatrices& aug, const Eigen::MatrixXd& L_aug,
                                           const Eigen::MatrixXd& K_aug, const Eigen::VectorXd& mu,
                                           const std::vector<Eigen::VectorXd>& neighbor_mu, const Eigen::VectorXd& nu,
                                           const Eigen::VectorXd& w) {
  Eigen::VectorXd cons = Eigen::VectorXd::Zero(aug.H.rows());
  for (const auto& mj : neighbor_mu) cons += aug.H * (mj - mu);
  return aug.A * mu - L_aug * (aug.C * mu) + K_aug * cons + aug.B1 * nu - aug.B2 * w - L_aug * (aug.D * w);
}

DissipationTerms dissipation_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_dot, const Eigen::MatrixXd& X,
                                   double alpha, const Eigen::MatrixXd& Q,
                                   const std::vector<Eigen::VectorXd>& neighbor_mu,
                                   const std::vector<Eigen::MatrixXd>& neighbor_X,
                                   const std::vector<double>& neighbor_pi, double gamma_sq, const Eigen::VectorXd& w,
                                   const Eigen::VectorXd& nu) {
  const double vdot = 2.0 * mu.dot(X * mu_dot);
  const double v = mu.dot(X * mu);
  const double q = mu.dot(Q * mu);
  double nb = 0.0;
  for (std::size_t j = 0; j < neighbor_mu.size(); ++j)
    nb += neighbor_pi[j] * neighbor_mu[j].dot(neighbor_X[j] * neighbor_mu[j]);
  const double in = gamma_sq * (w.squaredNorm() + nu.squaredNorm());
  return {vdot + 2.0 * alpha * v + q - nb - in,
          std::abs(vdot) + 2.0 * alpha * std::abs(v) + std::abs(q) + std::abs(nb) + in};
}

DissipationReport dissipation_residuals(const Trajectory& traj, const TrackerTruth& truth,
                                        const SynthesisSolution& sol, const NetworkSystem& sys,
                                        const SynthesisParams& params, const std::vector<std::size_t>& sample_indices) {
  const auto& models = sys.models();
  const auto& lay = sys.layout();
  const int N = lay.node_count();
  const Eigen::Index n = lay.n();
  const auto data = lmi_node_data(models, sys.graph(), params);

  std::vector<std::size_t> idx = sample_indices;
  if (idx.empty())
    for (std::size_t k = 0; k < traj.samples.size(); ++k) idx.push_back(k);

  DissipationReport rep;
  rep.max_violation.assign(static_cast<std::size_t>(N), -std::numeric_limits<double>::infinity());

  for (std::size_t k : idx) {
    const auto& s = traj.samples.at(k);
    const Eigen::VectorXd sd = sys.derivative(s.state, s.inputs);
    std::vector<Eigen::VectorXd> mu(static_cast<std::size_t>(N)), mud(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto& node = models.nodes[ui];
      const Eigen::Index d = lay.eps_dim(i);
      const auto& eps = truth.eps.at(k)[ui];
      mu[ui].resize(n + d);
      mud[ui].resize(n + d);
      mu[ui].head(n) = s.state.segment(lay.x(), n) - s.state.segment(lay.xhat(i), n) - s.state.segment(lay.ehat(i), n);
      mud[ui].head(n) = sd.segment(lay.x(), n) - sd.segment(lay.xhat(i), n) - sd.segment(lay.ehat(i), n);
      if (d > 0) {
        mu[ui].tail(d) = eps - s.state.segment(lay.epshat(i), d);
        const Eigen::VectorXd eps_dot = tracker_closed_loop(node.tracker) * eps - node.tracker.Gamma * s.inputs.f[ui];
        mud[ui].tail(d) = eps_dot - sd.segment(lay.epshat(i), d);
      }
    }
    for (int i = 0; i < N; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto& dat = data[ui];
      std::vector<Eigen::VectorXd> nmu;
      std::vector<Eigen::MatrixXd> nX;
      for (int j : dat.neighbors) {
        nmu.push_back(mu[static_cast<std::size_t>(j)]);
        nX.push_back(sol.nodes[static_cast<std::size_t>(j)].X);
      }
      Eigen::VectorXd w(s.inputs.xi.size() + s.inputs.xi_node[ui].size());
      w << s.inputs.xi, s.inputs.xi_node[ui];
      const auto t = dissipation_terms(mu[ui], mud[ui], sol.nodes[ui].X, dat.alpha, dat.Q, nmu, nX, dat.neighbor_pi,
                                       dat.gamma_sq, w, truth.nu.at(k)[ui]);
      rep.max_violation[ui] = std::max(rep.max_violation[ui], t.value);
      rep.worst_violation = std::max(rep.worst_violation, t.value);
      rep.energy_scale = std::max(rep.energy_scale, t.scale);
    }
  }
  return rep;
}

std::optional<double> hinf_ratio(const Trajectory& traj, const TrackerTruth& truth, const Eigen::MatrixXd& P,
                                 const std::vector<Eigen::MatrixXd>& Q, const std::vector<Eigen::MatrixXd>& Qbar) {
  const auto& lay = traj.layout;
  const int N = lay.node_count();
  const Eigen::Index n = lay.n();
  std::vector<double> t, num, nu2;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    double a = 0.0, b = 0.0;
    for (int i = 0; i < N; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const Eigen::VectorXd z = s.state.segment(lay.x(), n) - s.corrected[ui];
      a += z.dot(Qbar[ui] * z);
      const Eigen::Index d = lay.eps_dim(i);
      if (d > 0) {
        const Eigen::VectorXd delta = truth.eps[k][ui] - s.state.segment(lay.epshat(i), d);
        a += delta.dot(Q[ui] * delta);
      }
      b += truth.nu[k][ui].squaredNorm();
    }
    t.push_back(s.t);
    num.push_back(a);
    nu2.push_back(b);
  }
  const double den = traj.x0.dot(P * traj.x0) + traj.samples.back().disturbance_energy.sum() + trapezoid(t, nu2);
  if (!(den > 0.0)) return std::nullopt;
  return trapezoid(t, num) / den;
}

double tracking_energy(const Trajectory& traj, const std::vector<AttackSignal>& attacks, int node, double t0,
                       double t1) {
  std::vector<double> t, e;
  for (const auto& s : traj.samples) {
    if (s.t < t0 - 1e-12 || s.t > t1 + 1e-12) continue;
    const auto& r = s.residual[static_cast<std::size_t>(node)];
    t.push_back(s.t);
    e.push_back((r - attack_value(attacks, node, r.size(), s.t, false)).squaredNorm());
  }
  return trapezoid(t, e);
}

std::vector<TrackingMetrics> tracking_report(const Trajectory& traj, const std::vector<AttackSignal>& attacks) {
  const int N = traj.layout.node_count();
  const double T = traj.samples.back().t;
  std::vector<TrackingMetrics> out;
  for (int i = 0; i < N; ++i) {
    double tail = 0.0;
    for (const auto& s : traj.samples) {
      if (s.t < 0.9 * T) continue;
      const auto& r = s.residual[static_cast<std::size_t>(i)];
      tail = std::max(tail, (r - attack_value(attacks, i, r.size(), s.t, false)).norm());
    }
    out.push_back({tail, tracking_energy(traj, attacks, i, 0.0, T)});
  }
  return out;
}

}  // namespace attackdet
