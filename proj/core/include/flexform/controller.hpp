#pragma once

#include "flexform/graph.hpp"
#include "flexform/kernels.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace flexform {

class LeaderSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<EdgeState> edge_states(const Realization& p, const FormationGraph& graph,
                                   const PotentialFamily& family);

/// Shape potential V(p) = 1/2 sum_k phi(e_k, dbar_k).
double potential_energy(const Realization& p, const FormationGraph& graph,
                        const PotentialFamily& family);

/// Gradient law u_i = -sum_{j in N_i} g_ij z_ij, stacked. Equals -grad V.
Eigen::VectorXd gradient_control(const Realization& p, const FormationGraph& graph,
                                 const PotentialFamily& family);

/// Input of one agent computed from its own measurements only.
/// `neighbor_offsets[j]` is Q (p_i - p_j) expressed in the agent's frame Q;
/// the result is Q u_i.
Eigen::VectorXd local_frame_control(std::span<const Eigen::VectorXd> neighbor_offsets,
                                    std::span<const double> g_values);

/// Same, with the g values derived from the measured offsets. Only lengths
/// are frame-independent, so this needs no knowledge of Q.
Eigen::VectorXd local_frame_control(std::span<const Eigen::VectorXd> neighbor_offsets,
                                    std::span<const double> desired,
                                    const PotentialFamily& family);

/// Additional flex-agent input that is zero outside [t0, tf].
struct WindowedInput {
  double t0 = 0.0;
  double tf = 0.0;
  std::function<Eigen::VectorXd(double)> velocity;
};

/// Additional flex-agent input k_f (p_t - p_flex).
struct TargetInput {
  double gain = 0.0;
  Eigen::VectorXd target;
};

enum class LeaderMode { None, Windowed, Target };

class LeaderSpec {
 public:
  LeaderSpec() = default;

  static LeaderSpec none() { return {}; }
  static LeaderSpec windowed(double t0, double tf,
                             std::function<Eigen::VectorXd(double)> velocity);
  /// Piecewise-constant velocity: sample k holds on [times[k], times[k+1])
  /// and the last one until tf.
  static LeaderSpec piecewise(double t0, double tf, std::vector<double> times,
                              std::vector<Eigen::VectorXd> values);
  static LeaderSpec target(double gain, Eigen::VectorXd point);

  LeaderMode mode() const;
  const WindowedInput* windowed_input() const { return std::get_if<WindowedInput>(&input_); }
  const TargetInput* target_input() const { return std::get_if<TargetInput>(&input_); }

  /// Throws LeaderSpecError when the spec is unusable in dimension `dimension`.
  /// Windowed velocities are sampled over the window and must stay finite.
  void validate(int dimension) const;

  /// v_f(t) for the current flex position.
  Eigen::VectorXd input(double t, const Eigen::VectorXd& flex_position) const;

 private:
  std::variant<std::monostate, WindowedInput, TargetInput> input_;
};

/// u = -grad V + e_flex (x) v_f(t). Mode none reduces to gradient_control.
Eigen::VectorXd leader_control(const Realization& p, double t, const FormationGraph& graph,
                               const PotentialFamily& family, const LeaderSpec& spec);

/// V + weight * k_f |p_t - p_flex|^2.
double target_energy(const Realization& p, const FormationGraph& graph,
                     const PotentialFamily& family, const TargetInput& target,
                     double weight = 1.0);

}  // namespace flexform
