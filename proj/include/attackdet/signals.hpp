#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <variant>

namespace attackdet {

namespace attack {

struct Zero {
  Eigen::Index dim = 0;
};

/// amplitude on [t_on, t_off), zero elsewhere.
struct Step {
  Eigen::VectorXd amplitude;
  double t_on = 0.0;
  double t_off = 0.0;
};

/// constant + transient_amplitude * exp(-decay_rate (t - t_on)) for t >= t_on.
struct Biased {
  Eigen::VectorXd constant;
  Eigen::VectorXd transient_amplitude;
  double decay_rate = 1.0;
  double t_on = 0.0;
};

/// Half-sine pulse amplitude * sin(pi (t - t_on) / (t_off - t_on)) on
/// [t_on, t_off): a finite-energy attack.
struct L2Pulse {
  Eigen::VectorXd amplitude;
  double t_on = 0.0;
  double t_off = 0.0;
};

}  // namespace attack

using AttackSignal = std::variant<attack::Zero, attack::Step, attack::Biased, attack::L2Pulse>;

/// Output dimension of the signal.
Eigen::Index attack_dim(const AttackSignal& s);

/// Throws std::invalid_argument when t_on >= t_off or decay_rate <= 0.
void check_attack(const AttackSignal& s);

/// Right-continuous value f(t).
Eigen::VectorXd evaluate_attack(const AttackSignal& s, double t);

/// Left limit f(t-). Integrators use this at the end of a step so that
/// switching instants on the time grid are resolved exactly.
Eigen::VectorXd evaluate_attack_left(const AttackSignal& s, double t);

/// Band-limited white noise held constant over each integration step.
struct NoiseProcess {
  double intensity = 0.0;
  std::uint64_t seed = 0;
  double cutoff_time = 0.0;  // zero for t >= cutoff_time
};

/// Sample for step `step_index` (covering [k dt, (k+1) dt)): independent
/// N(0, intensity^2 / dt) components, reproducible from (seed, step_index).
Eigen::VectorXd sample_noise(const NoiseProcess& p, std::int64_t step_index, double dt, Eigen::Index dim);

}  // namespace attackdet
