#include "flexform/kernels.hpp"

namespace flexform::kernels {

std::vector<EdgeState> edge_states(const EdgeSet& edges, const Eigen::VectorXd& p,
                                   const PotentialFamily& family) {
  const int d = edges.dimension;
  if (p.size() != static_cast<Eigen::Index>(edges.num_nodes) * d) {
    throw DimensionError("position vector does not match the edge set");
  }
  std::vector<EdgeState> out;
  out.reserve(edges.edges.size());
  for (const auto& e : edges.edges) {
    EdgeState s;
    s.z = p.segment(e.first * d, d) - p.segment(e.second * d, d);
    s.error = s.z.squaredNorm() - e.desired * e.desired;
    s.g = family.g(s.error, e.desired);
    s.rho = family.rho(s.error, e.desired);
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::VectorXd control_field(const EdgeSet& edges, const Eigen::VectorXd& p,
                              const PotentialFamily& family) {
  const int d = edges.dimension;
  if (p.size() != static_cast<Eigen::Index>(edges.num_nodes) * d) {
    throw DimensionError("position vector does not match the edge set");
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p.size());
  for (const auto& e : edges.edges) {
    const Eigen::VectorXd z = p.segment(e.first * d, d) - p.segment(e.second * d, d);
    const double g = family.g(z.squaredNorm() - e.desired * e.desired, e.desired);
    u.segment(e.first * d, d) -= g * z;
    u.segment(e.second * d, d) += g * z;
  }
  return u;
}

double potential(const EdgeSet& edges, const Eigen::VectorXd& p,
                 const PotentialFamily& family) {
  const int d = edges.dimension;
  double v = 0.0;
  for (const auto& e : edges.edges) {
    const double err =
        (p.segment(e.first * d, d) - p.segment(e.second * d, d)).squaredNorm() -
        e.desired * e.desired;
    v += family.phi(err, e.desired);
  }
  return 0.5 * v;
}

Eigen::MatrixXd hessian(const EdgeSet& edges, const Eigen::VectorXd& p,
                        const PotentialFamily& family) {
  const int d = edges.dimension;
  const auto states = edge_states(edges, p, family);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p.size(), p.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    const Eigen::MatrixXd block = 2.0 * s.rho * s.z * s.z.transpose() +
                                  s.g * Eigen::MatrixXd::Identity(d, d);
    const int a = edges.edges[k].first;
    const int b = edges.edges[k].second;
    h.block(a * d, a * d, d, d) += block;
    h.block(b * d, b * d, d, d) += block;
    h.block(a * d, b * d, d, d) -= block;
    h.block(b * d, a * d, d, d) -= block;
  }
  return h;
}

double balance_residual(const EdgeSet& edges, const Eigen::VectorXd& p,
                        const PotentialFamily& family) {
  const Eigen::VectorXd u = control_field(edges, p, family);
  const int d = edges.dimension;
  double worst = 0.0;
  for (int i = 0; i < edges.num_nodes; ++i) {
    worst = std::max(worst, u.segment(i * d, d).norm());
  }
  return worst;
}

}  // namespace flexform::kernels
