#pragma once

#include "flexform/controller.hpp"
#include "flexform/graph.hpp"
#include "flexform/potential.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace flexform {

namespace ode {

using Field = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

/// Classical fourth-order Runge-Kutta step.
Eigen::VectorXd rk4_step(const Field& f, double t, const Eigen::VectorXd& y, double h);

struct EmbeddedStep {
  Eigen::VectorXd y;      // fifth-order solution
  Eigen::VectorXd error;  // difference to the embedded fourth-order solution
};

/// One Dormand-Prince 5(4) step.
EmbeddedStep dopri5_step(const Field& f, double t, const Eigen::VectorXd& y, double h);

}  // namespace ode

enum class StepMode { Fixed, Adaptive };

struct StepControl {
  StepMode mode = StepMode::Fixed;
  double dt = 1e-3;  // fixed step, or the initial step in adaptive mode
  double rtol = 1e-8;
  double atol = 1e-12;
  double min_dt = 1e-12;
  double max_dt = 0.05;
};

/// Instantaneous displacement of one agent.
struct PerturbationEvent {
  double time = 0.0;
  int agent = 0;  // zero-based
  Eigen::VectorXd displacement;

  /// Displacement of length `magnitude` in a direction drawn from `seed`.
  static PerturbationEvent seeded(double time, int agent, int dimension, double magnitude,
                                  std::uint64_t seed);
};

enum class EventKind { EquilibriumDetected, PerturbationApplied, TargetReached };

std::string to_string(EventKind kind);

struct TrajectoryEvent {
  double time = 0.0;
  EventKind kind = EventKind::EquilibriumDetected;
  int agent = -1;      // perturbed agent, if any
  double value = 0.0;  // residual, displacement norm or target distance
};

enum class RunStatus { Completed, StepUnderflow, DomainViolation, NonFinite };

std::string to_string(RunStatus status);

/// Discrete Lyapunov check over accepted steps.
struct LyapunovLog {
  bool checked = false;
  long steps = 0;
  long violations = 0;
  double max_increase = -std::numeric_limits<double>::infinity();
  double first_violation_time = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Realization> states;
  std::vector<Eigen::VectorXd> edge_errors;
  std::vector<double> gradient_norms;
  std::vector<TrajectoryEvent> events;
  RunStatus status = RunStatus::Completed;
  std::string message;
  LyapunovLog lyapunov;
  long accepted_steps = 0;

  const Realization& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
  bool ok() const { return status == RunStatus::Completed; }
};

struct IntegrationOptions {
  double t_end = 10.0;
  StepControl step;
  std::vector<PerturbationEvent> perturbations;
  double equilibrium_tol = 1e-9;
  double target_tol = 1e-3;
  int record_stride = 1;
  double lyapunov_tol = 1e-10;
  /// Weight on k_f |p_t - p_flex|^2 in the monitored energy of target mode.
  double target_weight = 1.0;
  bool stop_at_equilibrium = false;
};

/// The closed-loop system p' = u(p, t).
struct ClosedLoop {
  FormationGraph graph;
  PotentialFamily family;
  LeaderSpec leader;

  Eigen::VectorXd field(double t, const Eigen::VectorXd& p) const;
};

/// Integrates from `p0` over [0, t_end]. Perturbations are applied as jumps at
/// their exact times; the recorded state at such a time is the post-jump one.
/// A potential-domain violation stops the run and keeps the last valid state.
Trajectory integrate(const Realization& p0, const ClosedLoop& system,
                     const IntegrationOptions& options);

struct EquilibriumProbe {
  bool at_equilibrium = false;
  double residual = 0.0;  // max_i |sum_j g_ij z_ij|
};

EquilibriumProbe detect_equilibrium(const Realization& p, const FormationGraph& graph,
                                    const PotentialFamily& family, double tolerance = 1e-9);

/// Throws std::out_of_range for a bad agent index and DimensionError for a
/// displacement of the wrong size.
Realization apply_perturbation(const Realization& p, const PerturbationEvent& event);

}  // namespace flexform
