#include "flexform/controller.hpp"

#include <algorithm>
#include <cmath>

namespace flexform {

std::vector<EdgeState> edge_states(const Realization& p, const FormationGraph& graph,
                                   const PotentialFamily& family) {
  require_compatible(p, graph);
  return kernels::edge_states(graph.view(), p.stacked(), family);
}

double potential_energy(const Realization& p, const FormationGraph& graph,
                        const PotentialFamily& family) {
  require_compatible(p, graph);
  return kernels::potential(graph.view(), p.stacked(), family);
}

Eigen::VectorXd gradient_control(const Realization& p, const FormationGraph& graph,
                                 const PotentialFamily& family) {
  require_compatible(p, graph);
  return kernels::control_field(graph.view(), p.stacked(), family);
}

Eigen::VectorXd local_frame_control(std::span<const Eigen::VectorXd> neighbor_offsets,
                                    std::span<const double> g_values) {
  if (neighbor_offsets.size() != g_values.size()) {
    throw DimensionError("one g value is needed per neighbour offset");
  }
  if (neighbor_offsets.empty()) return {};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(neighbor_offsets.front().size());
  for (std::size_t j = 0; j < neighbor_offsets.size(); ++j) {
    u -= g_values[j] * neighbor_offsets[j];
  }
  return u;
}

Eigen::VectorXd local_frame_control(std::span<const Eigen::VectorXd> neighbor_offsets,
                                    std::span<const double> desired,
                                    const PotentialFamily& family) {
  if (neighbor_offsets.size() != desired.size()) {
    throw DimensionError("one desired distance is needed per neighbour offset");
  }
  std::vector<double> g(neighbor_offsets.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] = family.g(neighbor_offsets[j].squaredNorm() - desired[j] * desired[j], desired[j]);
  }
  return local_frame_control(neighbor_offsets, g);
}

LeaderSpec LeaderSpec::windowed(double t0, double tf,
                                std::function<Eigen::VectorXd(double)> velocity) {
  LeaderSpec spec;
  spec.input_ = WindowedInput{t0, tf, std::move(velocity)};
  return spec;
}

LeaderSpec LeaderSpec::piecewise(double t0, double tf, std::vector<double> times,
                                 std::vector<Eigen::VectorXd> values) {
  if (times.empty() || times.size() != values.size()) {
    throw LeaderSpecError("piecewise input needs matching, non-empty times and values");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw LeaderSpecError("piecewise sample times must be nondecreasing");
  }
  auto fn = [times = std::move(times), values = std::move(values)](double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return Eigen::VectorXd(Eigen::VectorXd::Zero(values.front().size()));
    return values[static_cast<std::size_t>(it - times.begin() - 1)];
  };
  return windowed(t0, tf, std::move(fn));
}

LeaderSpec LeaderSpec::target(double gain, Eigen::VectorXd point) {
  LeaderSpec spec;
  spec.input_ = TargetInput{gain, std::move(point)};
  return spec;
}

LeaderMode LeaderSpec::mode() const {
  if (std::holds_alternative<WindowedInput>(input_)) return LeaderMode::Windowed;
  if (std::holds_alternative<TargetInput>(input_)) return LeaderMode::Target;
  return LeaderMode::None;
}

void LeaderSpec::validate(int dimension) const {
  if (const auto* w = windowed_input()) {
    if (!std::isfinite(w->t0) || !std::isfinite(w->tf) || !(w->tf >= w->t0)) {
      throw LeaderSpecError("windowed input needs a finite window with t0 <= tf");
    }
    if (!w->velocity) throw LeaderSpecError("windowed input has no velocity evaluator");
    constexpr int kSamples = 1000;
    for (int k = 0; k <= kSamples; ++k) {
      const double t = w->t0 + (w->tf - w->t0) * k / kSamples;
      const Eigen::VectorXd v = w->velocity(t);
      if (v.size() != dimension) throw LeaderSpecError("windowed velocity has the wrong dimension");
      if (!v.allFinite()) throw LeaderSpecError("windowed velocity is not bounded on its window");
    }
  } else if (const auto* tgt = target_input()) {
    if (!(tgt->gain > 0.0) || !std::isfinite(tgt->gain)) {
      throw LeaderSpecError("target gain k_f must be positive");
    }
    if (tgt->target.size() != dimension || !tgt->target.allFinite()) {
      throw LeaderSpecError("target point has the wrong dimension");
    }
  }
}

Eigen::VectorXd LeaderSpec::input(double t, const Eigen::VectorXd& flex_position) const {
  if (const auto* w = windowed_input()) {
    if (t < w->t0 || t > w->tf) return Eigen::VectorXd::Zero(flex_position.size());
    return w->velocity(t);
  }
  if (const auto* tgt = target_input()) return tgt->gain * (tgt->target - flex_position);
  return Eigen::VectorXd::Zero(flex_position.size());
}

Eigen::VectorXd leader_control(const Realization& p, double t, const FormationGraph& graph,
                               const PotentialFamily& family, const LeaderSpec& spec) {
  Eigen::VectorXd u = gradient_control(p, graph, family);
  if (spec.mode() == LeaderMode::None) return u;
  const int d = graph.dimension();
  const int f = graph.flex_node();
  u.segment(f * d, d) += spec.input(t, p.agent(f));
  return u;
}

double target_energy(const Realization& p, const FormationGraph& graph,
                     const PotentialFamily& family, const TargetInput& target, double weight) {
  const Eigen::VectorXd offset = target.target - p.agent(graph.flex_node());
  return potential_energy(p, graph, family) + weight * target.gain * offset.squaredNorm();
}

}  // namespace flexform
