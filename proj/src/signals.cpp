#include "attackdet/signals.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace attackdet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Eigen::VectorXd eval_impl(const AttackSignal& s, double t, bool left) {
  // inside(a, b): t in [a, b) for right limits, t in (a, b] for left limits
  auto inside = [&](double a, double b) { return left ? (t > a && t <= b) : (t >= a && t < b); };
  auto after = [&](double a) { return left ? t > a : t >= a; };
  return std::visit(
      overloaded{
          [&](const attack::Zero& z) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(z.dim); },
          [&](const attack::Step& st) -> Eigen::VectorXd {
            if (inside(st.t_on, st.t_off)) return st.amplitude;
            return Eigen::VectorXd::Zero(st.amplitude.size());
          },
          [&](const attack::Biased& b) -> Eigen::VectorXd {
            if (!after(b.t_on)) return Eigen::VectorXd::Zero(b.constant.size());
            return b.constant + b.transient_amplitude * std::exp(-b.decay_rate * (t - b.t_on));
          },
          [&](const attack::L2Pulse& p) -> Eigen::VectorXd {
            if (!inside(p.t_on, p.t_off)) return Eigen::VectorXd::Zero(p.amplitude.size());
            return p.amplitude * std::sin(std::numbers::pi * (t - p.t_on) / (p.t_off - p.t_on));
          },
      },
      s);
}

}  // namespace

Eigen::Index attack_dim(const AttackSignal& s) {
  return std::visit(overloaded{
                        [](const attack::Zero& z) { return z.dim; },
                        [](const attack::Step& st) { return st.amplitude.size(); },
                        [](const attack::Biased& b) { return b.constant.size(); },
                        [](const attack::L2Pulse& p) { return p.amplitude.size(); },
                    },
                    s);
}

void check_attack(const AttackSignal& s) {
  std::visit(overloaded{
                 [](const attack::Zero&) {},
                 [](const attack::Step& st) {
                   if (!(st.t_on < st.t_off)) throw std::invalid_argument("step attack: t_on must precede t_off");
                 },
                 [](const attack::Biased& b) {
                   if (!(b.decay_rate > 0.0)) throw std::invalid_argument("biased attack: decay_rate must be positive");
                   if (b.transient_amplitude.size() != b.constant.size())
                     throw std::invalid_argument("biased attack: constant and transient dimensions differ");
                 },
                 [](const attack::L2Pulse& p) {
                   if (!(p.t_on < p.t_off)) throw std::invalid_argument("l2 pulse attack: t_on must precede t_off");
                 },
             },
             s);
}

Eigen::VectorXd evaluate_attack(const AttackSignal& s, double t) { return eval_impl(s, t, false); }

Eigen::VectorXd evaluate_attack_left(const AttackSignal& s, double t) { return eval_impl(s, t, true); }

Eigen::VectorXd sample_noise(const NoiseProcess& p, std::int64_t step_index, double dt, Eigen::Index dim) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_noise: dt must be positive");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  if (p.intensity == 0.0 || dim == 0) return out;
  if (static_cast<double>(step_index) * dt >= p.cutoff_time) return out;

  const auto k = static_cast<std::uint64_t>(step_index);
  std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, p.intensity / std::sqrt(dt));
  for (Eigen::Index c = 0; c < dim; ++c) out(c) = normal(engine);
  return out;
}

}  // namespace attackdet
