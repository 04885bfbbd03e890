#include "flexform/integrator.hpp"

#include "flexform/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace flexform {

namespace ode {

Eigen::VectorXd rk4_step(const Field& f, double t, const Eigen::VectorXd& y, double h) {
  const Eigen::VectorXd k1 = f(t, y);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

EmbeddedStep dopri5_step(const Field& f, double t, const Eigen::VectorXd& y, double h) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b* of the embedded fourth-order pair
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Eigen::VectorXd k1 = f(t, y);
  const Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
  const Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Eigen::VectorXd k5 =
      f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Eigen::VectorXd k6 =
      f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  EmbeddedStep out;
  out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Eigen::VectorXd k7 = f(t + h, out.y);
  out.error = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return out;
}

}  // namespace ode

PerturbationEvent PerturbationEvent::seeded(double time, int agent, int dimension,
                                            double magnitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd dir(dimension);
  do {
    for (int k = 0; k < dimension; ++k) dir[k] = normal(rng);
  } while (dir.norm() < 1e-12);
  return {time, agent, magnitude * dir.normalized()};
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::EquilibriumDetected: return "equilibrium_detected";
    case EventKind::PerturbationApplied: return "perturbation_applied";
    case EventKind::TargetReached: return "target_reached";
  }
  return "unknown";
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::StepUnderflow: return "step_underflow";
    case RunStatus::DomainViolation: return "domain_violation";
    case RunStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

Eigen::VectorXd ClosedLoop::field(double t, const Eigen::VectorXd& p) const {
  Eigen::VectorXd u = kernels::control_field(graph.view(), p, family);
  if (leader.mode() != LeaderMode::None) {
    const int d = graph.dimension();
    const int f = graph.flex_node();
    u.segment(f * d, d) += leader.input(t, p.segment(f * d, d));
  }
  return u;
}

EquilibriumProbe detect_equilibrium(const Realization& p, const FormationGraph& graph,
                                    const PotentialFamily& family, double tolerance) {
  require_compatible(p, graph);
  const double r = kernels::balance_residual(graph.view(), p.stacked(), family);
  return {r < tolerance, r};
}

Realization apply_perturbation(const Realization& p, const PerturbationEvent& event) {
  if (event.agent < 0 || event.agent >= p.num_agents()) {
    throw std::out_of_range("perturbation targets agent " + std::to_string(event.agent + 1) +
                            " but the realization has " + std::to_string(p.num_agents()));
  }
  if (event.displacement.size() != p.dimension()) {
    throw DimensionError("perturbation displacement has the wrong dimension");
  }
  Realization out = p;
  out.agent(event.agent) += event.displacement;
  return out;
}

namespace {

struct Monitor {
  const ClosedLoop& sys;
  double weight;

  /// Monitored energy at (t, p), or nothing when no monotonicity is expected.
  std::optional<double> energy(const Eigen::VectorXd& p) const {
    const double v = kernels::potential(sys.graph.view(), p, sys.family);
    if (const auto* tgt = sys.leader.target_input()) {
      const int d = sys.graph.dimension();
      const Eigen::VectorXd off = tgt->target - p.segment(sys.graph.flex_node() * d, d);
      return v + weight * tgt->gain * off.squaredNorm();
    }
    return v;
  }

  /// Windowed input breaks monotonicity while it acts.
  bool checked_interval(double t0, double t1) const {
    if (const auto* w = sys.leader.windowed_input()) return t1 < w->t0 || t0 > w->tf;
    return true;
  }
};

void validate_inputs(const Realization& p0, const ClosedLoop& sys,
                     const IntegrationOptions& opt) {
  require_compatible(p0, sys.graph);
  if (!(opt.t_end > 0.0) || !std::isfinite(opt.t_end)) {
    throw std::invalid_argument("t_end must be positive and finite");
  }
  if (!(opt.step.dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (opt.step.mode == StepMode::Adaptive && !(opt.step.rtol > 0.0)) {
    throw std::invalid_argument("adaptive mode needs a positive relative tolerance");
  }
  if (opt.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  sys.leader.validate(sys.graph.dimension());
  for (const auto& ev : opt.perturbations) {
    if (ev.agent < 0 || ev.agent >= sys.graph.num_nodes()) {
      throw std::out_of_range("perturbation agent index out of range");
    }
    if (ev.displacement.size() != sys.graph.dimension()) {
      throw DimensionError("perturbation displacement has the wrong dimension");
    }
    if (!(ev.displacement.norm() > 0.0)) {
      throw std::invalid_argument("perturbation magnitude must be positive");
    }
    if (ev.time < 0.0 || ev.time > opt.t_end) {
      throw std::invalid_argument("perturbation time lies outside [0, t_end]");
    }
  }
}

}  // namespace

Trajectory integrate(const Realization& p0, const ClosedLoop& sys,
                     const IntegrationOptions& opt) {
  validate_inputs(p0, sys, opt);

  const int d = sys.graph.dimension();
  const EdgeSet edges = sys.graph.view();
  const ode::Field f = [&sys](double t, const Eigen::VectorXd& y) { return sys.field(t, y); };
  const Monitor monitor{sys, opt.target_weight};

  auto events = opt.perturbations;
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  std::size_t next_event = 0;

  Trajectory traj;
  traj.lyapunov.checked = true;

  const auto record = [&](double t, const Eigen::VectorXd& y) {
    if (!traj.times.empty() && t <= traj.times.back()) {
      traj.states.back() = Realization(y, d);
      traj.edge_errors.pop_back();
      traj.gradient_norms.pop_back();
    } else {
      traj.times.push_back(t);
      traj.states.emplace_back(y, d);
    }
    const auto states = kernels::edge_states(edges, y, sys.family);
    Eigen::VectorXd e(static_cast<Eigen::Index>(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) e[static_cast<Eigen::Index>(k)] = states[k].error;
    traj.edge_errors.push_back(std::move(e));
    traj.gradient_norms.push_back(kernels::control_field(edges, y, sys.family).norm());
  };

  const double time_eps = 1e-12 * std::max(1.0, opt.t_end);
  double t = 0.0;
  Eigen::VectorXd y = p0.stacked();

  const auto apply_due_events = [&](double now) {
    bool any = false;
    while (next_event < events.size() && events[next_event].time <= now + time_eps) {
      const auto& ev = events[next_event++];
      y.segment(ev.agent * d, d) += ev.displacement;
      traj.events.push_back({now, EventKind::PerturbationApplied, ev.agent, ev.displacement.norm()});
      any = true;
    }
    return any;
  };

  bool at_eq = false;
  bool at_target = false;
  const auto probe = [&](double now) {
    bool fired = false;
    const double r = kernels::balance_residual(edges, y, sys.family);
    const bool eq_now = r < opt.equilibrium_tol;
    if (eq_now && !at_eq) {
      traj.events.push_back({now, EventKind::EquilibriumDetected, -1, r});
      fired = true;
    }
    at_eq = eq_now;
    if (const auto* tgt = sys.leader.target_input()) {
      const double dist = (tgt->target - y.segment(sys.graph.flex_node() * d, d)).norm();
      const bool hit = dist < opt.target_tol;
      if (hit && !at_target) {
        traj.events.push_back({now, EventKind::TargetReached, sys.graph.flex_node(), dist});
        fired = true;
      }
      at_target = hit;
    }
    return fired;
  };

  try {
    apply_due_events(t);
    probe(t);
    record(t, y);
  } catch (const PotentialDomainError& err) {
    traj.status = RunStatus::DomainViolation;
    traj.message = err.what();
    if (traj.times.empty()) {
      traj.times.push_back(t);
      traj.states.emplace_back(y, d);
      traj.edge_errors.emplace_back();
      traj.gradient_norms.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return traj;
  }

  double h = opt.step.dt;
  double energy = monitor.energy(y).value_or(0.0);
  long step_count = 0;

  while (t < opt.t_end - time_eps) {
    const double horizon = next_event < events.size() ? events[next_event].time : opt.t_end;
    const double remaining = std::min(horizon, opt.t_end) - t;
    double h_try = std::min(h, remaining);
    bool clamped = h_try >= remaining - time_eps;
    if (opt.step.mode == StepMode::Adaptive) h_try = std::min(h_try, opt.step.max_dt);
    clamped = clamped && h_try >= remaining - time_eps;

    Eigen::VectorXd y_new;
    double h_used = h_try;
    try {
      if (opt.step.mode == StepMode::Fixed) {
        y_new = ode::rk4_step(f, t, y, h_try);
      } else {
        while (true) {
          bool ok = false;
          try {
            const auto st = ode::dopri5_step(f, t, y, h_try);
            const Eigen::ArrayXd scale =
                opt.step.atol + opt.step.rtol * y.cwiseAbs().cwiseMax(st.y.cwiseAbs()).array();
            const double err = std::sqrt((st.error.array() / scale).square().mean());
            if (std::isfinite(err) && err <= 1.0) {
              y_new = st.y;
              ok = true;
              const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
              h_used = h_try;
              h = std::min(h_try * grow, opt.step.max_dt);
            } else {
              const double shrink = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.5) : 0.25;
              h_try *= shrink;
            }
          } catch (const PotentialDomainError&) {
            h_try *= 0.25;
          }
          if (ok) break;
          clamped = false;
          if (h_try < opt.step.min_dt) {
            traj.status = RunStatus::StepUnderflow;
            std::ostringstream os;
            os << "step size fell below " << opt.step.min_dt << " at t = " << t;
            traj.message = os.str();
            break;
          }
        }
        if (traj.status != RunStatus::Completed) break;
      }
    } catch (const PotentialDomainError& err) {
      traj.status = RunStatus::DomainViolation;
      std::ostringstream os;
      os << "at t = " << t << ": " << err.what();
      traj.message = os.str();
      break;
    }

    if (!y_new.allFinite()) {
      traj.status = RunStatus::NonFinite;
      std::ostringstream os;
      os << "state became non-finite after t = " << t;
      traj.message = os.str();
      break;
    }

    const double t_new = clamped ? std::min(horizon, opt.t_end) : t + h_used;

    double energy_new = 0.0;
    try {
      energy_new = monitor.energy(y_new).value_or(0.0);
    } catch (const PotentialDomainError& err) {
      traj.status = RunStatus::DomainViolation;
      traj.message = err.what();
      break;
    }
    if (monitor.checked_interval(t, t_new)) {
      const double inc = energy_new - energy;
      ++traj.lyapunov.steps;
      traj.lyapunov.max_increase = std::max(traj.lyapunov.max_increase, inc);
      if (inc > opt.lyapunov_tol) {
        if (traj.lyapunov.violations == 0) traj.lyapunov.first_violation_time = t_new;
        ++traj.lyapunov.violations;
      }
    }

    t = t_new;
    y = std::move(y_new);
    energy = energy_new;
    ++step_count;
    ++traj.accepted_steps;

    bool notable = false;
    try {
      if (apply_due_events(t)) {
        notable = true;
        energy = monitor.energy(y).value_or(0.0);
      }
      notable = probe(t) || notable;
      const bool last = t >= opt.t_end - time_eps;
      if (notable || last || step_count % opt.record_stride == 0) record(t, y);
    } catch (const PotentialDomainError& err) {
      traj.status = RunStatus::DomainViolation;
      traj.message = err.what();
      break;
    }
    if (opt.stop_at_equilibrium && at_eq) break;
  }

  if (traj.times.back() < t) {
    try {
      record(t, y);
    } catch (const PotentialDomainError&) {
    }
  }
  return traj;
}

}  // namespace flexform
