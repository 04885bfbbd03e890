#include "flexform/equilibria.hpp"

#include "flexform/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flexform {

std::string to_string(ConstructionMethod method) {
  switch (method) {
    case ConstructionMethod::RootfindCollinear: return "rootfind-collinear";
    case ConstructionMethod::RootfindCoplanar: return "rootfind-coplanar";
    case ConstructionMethod::CoincidenceConstruct: return "coincidence-construct";
    case ConstructionMethod::FlowCapture: return "flow-capture";
  }
  return "unknown";
}

namespace {

void require_topology(const FormationGraph& graph, Topology t, const char* what) {
  if (graph.topology() != t) throw std::invalid_argument(std::string(what) + ": wrong graph topology");
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

double mean_desired(const FormationGraph& graph) {
  const auto rigid = graph.rigid_edges();
  double s = 0.0;
  for (const auto& e : rigid) s += e.desired;
  return s / static_cast<double>(rigid.size());
}

/// Places the flex agent at its desired distance from the anchor along `dir`.
void place_flex(Realization& p, const FormationGraph& graph, const Eigen::VectorXd& dir) {
  p.agent(graph.flex_node()) =
      p.agent(graph.anchor_node()) + graph.flex_edge().desired * dir.normalized();
}

CatalogEntry finish(std::string label, Realization p, const FormationGraph& graph,
                    const PotentialFamily& family, ConstructionMethod method) {
  CatalogEntry out;
  out.label = std::move(label);
  out.residual = kernels::balance_residual(graph.view(), p.stacked(), family);
  out.classification = classify(p, graph, family);
  out.p = std::move(p);
  out.method = method;
  return out;
}

void expect_class(const CatalogEntry& e, EquilibriumKind kind, const std::string& subform) {
  if (e.classification.kind != kind || e.classification.subform != subform) {
    std::ostringstream os;
    os << "construction for " << e.label << " reached " << to_string(e.classification.kind);
    if (!e.classification.subform.empty()) os << " (" << e.classification.subform << ")";
    os << " with residual " << e.residual;
    throw ConstructionError(os.str());
  }
}

template <typename Fn>
CatalogEntry guard_domain(const std::string& label, Fn&& fn) {
  try {
    return fn();
  } catch (const PotentialDomainError& err) {
    throw ConstructionError(label + ": potential undefined at this construction (" + err.what() + ")");
  }
}

/// Rigid subgraph embedded in `dim` dimensions.
struct FlatSystem {
  std::vector<Edge> edges;
  int nodes = 0;
  int dim = 0;
  EdgeSet view() const { return {nodes, dim, edges}; }
};

FlatSystem flat_system(const FormationGraph& graph, int dim) {
  return {graph.rigid_edges(), graph.num_rigid_nodes(), dim};
}

/// Gradient flow with RK4 at a step set by the largest curvature of the
/// seed; returns the visited state of smallest balance residual.
Eigen::VectorXd flat_flow(const FlatSystem& sys, const Eigen::VectorXd& seed,
                          const PotentialFamily& family, int steps) {
  const EdgeSet view = sys.view();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernels::hessian(view, seed, family),
                                                    Eigen::EigenvaluesOnly);
  const double lmax = std::max(1e-9, es.eigenvalues().cwiseAbs().maxCoeff());
  const double dt = 0.5 / lmax;
  const ode::Field f = [&](double, const Eigen::VectorXd& y) {
    return kernels::control_field(view, y, family);
  };
  Eigen::VectorXd y = seed;
  Eigen::VectorXd best = seed;
  double best_r = kernels::balance_residual(view, seed, family);
  for (int k = 0; k < steps && best_r > 1e-9; ++k) {
    try {
      y = ode::rk4_step(f, 0.0, y, dt);
    } catch (const PotentialDomainError&) {
      break;
    }
    if (!y.allFinite()) break;
    const double r = kernels::balance_residual(view, y, family);
    if (r < best_r) {
      best_r = r;
      best = y;
    }
  }
  return best;
}

/// Embeds flat rigid coordinates into the full graph's dimension.
Realization embed(const FormationGraph& graph, const Eigen::VectorXd& flat, int flat_dim) {
  const int d = graph.dimension();
  Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * d), d);
  for (int i = 0; i < graph.num_rigid_nodes(); ++i) {
    p.agent(i).head(flat_dim) = flat.segment(i * flat_dim, flat_dim);
  }
  return p;
}

Eigen::VectorXd unit(int d, int k) { return Eigen::VectorXd::Unit(d, k); }

}  // namespace

Realization realize_desired(const FormationGraph& graph) {
  if (!graph.certified()) throw std::invalid_argument("realize_desired needs a certified topology");
  const int d = graph.dimension();
  Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * d), d);
  const double d01 = graph.desired(0, 1), d02 = graph.desired(0, 2), d12 = graph.desired(1, 2);
  const double x2 = (d01 * d01 + d02 * d02 - d12 * d12) / (2.0 * d01);
  const double y2sq = d02 * d02 - x2 * x2;
  if (!(y2sq > 0.0)) throw ConstructionError("desired triangle is degenerate or infeasible");
  p.agent(1)[0] = d01;
  p.agent(2)[0] = x2;
  p.agent(2)[1] = std::sqrt(y2sq);
  if (d == 3) {
    const double d03 = graph.desired(0, 3), d13 = graph.desired(1, 3), d23 = graph.desired(2, 3);
    const double y2 = p.agent(2)[1];
    const double x = (d01 * d01 + d03 * d03 - d13 * d13) / (2.0 * d01);
    const double dot = 0.5 * (d03 * d03 + d02 * d02 - d23 * d23);
    const double y = (dot - x * x2) / y2;
    const double zsq = d03 * d03 - x * x - y * y;
    if (!(zsq > 0.0)) throw ConstructionError("desired tetrahedron has no positive volume");
    p.agent(3) << x, y, std::sqrt(zsq);
  }
  place_flex(p, graph, unit(d, 0));
  return p;
}

PolishResult polish_equilibrium(const EdgeSet& edges, const Eigen::VectorXd& p,
                                const PotentialFamily& family, double tolerance,
                                int max_iterations) {
  PolishResult out;
  out.p = p;
  out.residual = kernels::balance_residual(edges, p, family);
  const auto try_step = [&](const Eigen::VectorXd& step) {
    for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
      const Eigen::VectorXd trial = out.p + alpha * step;
      try {
        const double r = kernels::balance_residual(edges, trial, family);
        if (std::isfinite(r) && r < out.residual) {
          out.p = trial;
          out.residual = r;
          return true;
        }
      } catch (const PotentialDomainError&) {
      }
    }
    return false;
  };
  for (; out.iterations < max_iterations; ++out.iterations) {
    if (out.residual < tolerance) break;
    const Eigen::MatrixXd H = kernels::hessian(edges, out.p, family);
    const Eigen::VectorXd u = kernels::control_field(edges, out.p, family);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const Eigen::VectorXd c = es.eigenvectors().transpose() * u;
    // Newton on the non-degenerate eigenspace, then Levenberg-Marquardt
    // steps (H^2 + mu I)^-1 H u with growing damping.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      if (std::abs(lam[k]) > 1e-9 * scale) w[k] = c[k] / lam[k];
    }
    bool moved = try_step(es.eigenvectors() * w);
    for (double mu = 1e-12 * scale * scale; !moved && mu < 1e6 * scale * scale; mu *= 100.0) {
      for (Eigen::Index k = 0; k < c.size(); ++k) w[k] = lam[k] * c[k] / (lam[k] * lam[k] + mu);
      moved = try_step(es.eigenvectors() * w);
    }
    if (!moved) break;
  }
  out.converged = out.residual < tolerance;
  return out;
}

CatalogEntry find_collinear_equilibrium(const FormationGraph& graph, const PotentialFamily& family,
                                        const CollinearOptions& opt) {
  require_topology(graph, Topology::TriangleFlex2D, "find_collinear_equilibrium");
  if (opt.middle < 0 || opt.middle > 2) throw std::out_of_range("middle agent must be 0, 1 or 2");
  std::array<int, 2> ends{};
  for (int a = 0, n = 0; a < 3; ++a) {
    if (a != opt.middle) ends[static_cast<std::size_t>(n++)] = a;
  }
  const int i = ends[0], j = opt.middle, k = ends[1];
  const double dij = graph.desired(i, j), djk = graph.desired(j, k), dik = graph.desired(i, k);

  // Balance of the end agents along the line with gaps s = |ij|, t = |jk|.
  const auto residual = [&](double s, double t) {
    const double gij = family.g(s * s - dij * dij, dij);
    const double gjk = family.g(t * t - djk * djk, djk);
    const double gik = family.g((s + t) * (s + t) - dik * dik, dik);
    return Eigen::Vector2d(gij * s + gik * (s + t), gik * (s + t) + gjk * t);
  };
  const auto jacobian = [&](double s, double t) {
    const double u = s + t;
    const double a = family.g(s * s - dij * dij, dij) + 2.0 * family.rho(s * s - dij * dij, dij) * s * s;
    const double b = family.g(t * t - djk * djk, djk) + 2.0 * family.rho(t * t - djk * djk, djk) * t * t;
    const double c = family.g(u * u - dik * dik, dik) + 2.0 * family.rho(u * u - dik * dik, dik) * u * u;
    Eigen::Matrix2d J;
    J << a + c, c, c, c + b;
    return J;
  };

  const double L = (dij + djk + dik) / 3.0;
  const std::vector<Eigen::Vector2d> seeds = {
      {L / std::sqrt(3.0), L / std::sqrt(3.0)}, {dij, djk}, {0.5 * dij, 0.5 * djk},
      {0.75 * dij, 0.75 * djk}, {1.25 * dij, 1.25 * djk}, {0.25 * L, 0.25 * L}};

  std::ostringstream diag;
  return guard_domain("2a", [&]() -> CatalogEntry {
    for (const auto& seed : seeds) {
      Eigen::Vector2d x = seed;
      Eigen::Vector2d F = residual(x[0], x[1]);
      for (int it = 0; it < opt.max_iterations && F.norm() > opt.tolerance * 1e-2; ++it) {
        const Eigen::Vector2d dx = jacobian(x[0], x[1]).fullPivLu().solve(-F);
        double alpha = 1.0;
        bool moved = false;
        while (alpha > 1e-12) {
          const Eigen::Vector2d trial = x + alpha * dx;
          if (trial.minCoeff() > 0.0) {
            const Eigen::Vector2d Ft = residual(trial[0], trial[1]);
            if (Ft.norm() < F.norm()) {
              x = trial;
              F = Ft;
              moved = true;
              break;
            }
          }
          alpha *= 0.5;
        }
        if (!moved) break;
      }
      diag << " seed (" << seed[0] << ", " << seed[1] << ") -> gaps (" << x[0] << ", " << x[1]
           << "), |F| = " << F.norm() << ";";
      if (!(F.norm() < 1e-9)) continue;

      const int d = graph.dimension();
      Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * d), d);
      p.agent(i)[0] = -x[0];
      p.agent(j)[0] = 0.0;
      p.agent(k)[0] = x[1];
      place_flex(p, graph, opt.flex_on_axis ? unit(d, 0) : unit(d, 1));
      auto entry = finish("2a", std::move(p), graph, family, ConstructionMethod::RootfindCollinear);
      if (entry.classification.kind == EquilibriumKind::UndesiredQI2 &&
          entry.classification.subform == "2a") {
        return entry;
      }
    }
    throw ConstructionError("collinear root-finding did not converge:" + diag.str());
  });
}

CatalogEntry construct_coincident_pair_2d(const FormationGraph& graph,
                                          const PotentialFamily& family, std::pair<int, int> pair) {
  require_topology(graph, Topology::TriangleFlex2D, "construct_coincident_pair_2d");
  auto [a, b] = pair;
  if (a == b || a < 0 || b < 0 || a > 2 || b > 2) throw std::out_of_range("pair must name two rigid agents");
  const int c = 3 - a - b;
  const double r = graph.desired(c, a);
  if (!nearly_equal(r, graph.desired(c, b))) {
    throw ConstructionError("2b needs equal desired distances from the single agent to the pair");
  }
  return guard_domain("2b", [&] {
    const int d = graph.dimension();
    Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * d), d);
    p.agent(c)[0] = r;
    place_flex(p, graph, unit(d, 1));
    auto e = finish("2b", std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
    expect_class(e, EquilibriumKind::UndesiredQI2, "2b");
    return e;
  });
}

CatalogEntry construct_all_coincident_2d(const FormationGraph& graph, const PotentialFamily& family) {
  require_topology(graph, Topology::TriangleFlex2D, "construct_all_coincident_2d");
  return guard_domain("2c", [&] {
    const int d = graph.dimension();
    Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * d), d);
    place_flex(p, graph, unit(d, 1));
    auto e = finish("2c", std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
    expect_class(e, EquilibriumKind::UndesiredQI2, "2c");
    return e;
  });
}

CatalogEntry construct_flex_collapse(const FormationGraph& graph, const PotentialFamily& family) {
  return guard_domain("QI1", [&] {
    Realization p = realize_desired(graph);
    p.agent(graph.flex_node()) = p.agent(graph.anchor_node());
    auto e = finish("QI1", std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
    expect_class(e, EquilibriumKind::UndesiredQI1, "");
    return e;
  });
}

namespace {

CatalogEntry coplanar_coincident_triple(const FormationGraph& graph, const PotentialFamily& family) {
  for (int loner = 3; loner >= 0; --loner) {
    std::vector<int> triple;
    for (int a = 0; a < 4; ++a) {
      if (a != loner) triple.push_back(a);
    }
    const double r = graph.desired(triple[0], loner);
    if (!nearly_equal(r, graph.desired(triple[1], loner)) ||
        !nearly_equal(r, graph.desired(triple[2], loner))) {
      continue;
    }
    Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * 3), 3);
    p.agent(loner)[0] = r;
    place_flex(p, graph, unit(3, 1));
    auto e = finish("3d", std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
    expect_class(e, EquilibriumKind::UndesiredQI2, "3d");
    return e;
  }
  throw ConstructionError(
      "3d needs an agent whose desired distances to the other three are equal");
}

CatalogEntry coplanar_two_pairs(const FormationGraph& graph, const PotentialFamily& family) {
  static constexpr std::array<std::array<int, 4>, 3> kPairings = {
      {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
  std::ostringstream diag;
  for (const auto& q : kPairings) {
    const int i = q[0], j = q[1], k = q[2], l = q[3];
    const double dik = graph.desired(i, k), dil = graph.desired(i, l);
    const auto f = [&](double r) {
      return family.g(r * r - dik * dik, dik) + family.g(r * r - dil * dil, dil);
    };
    double lo = 0.0, hi = std::max(dik, dil);
    while (f(hi) <= 0.0) hi *= 2.0;
    // f(0) < 0 because both errors are negative there
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * 3), 3);
    p.agent(k)[0] = r;
    p.agent(l)[0] = r;
    place_flex(p, graph, unit(3, 1));
    auto e = finish("3e", std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
    diag << " pairing (" << i + 1 << j + 1 << ")(" << k + 1 << l + 1 << "): r = " << r
         << ", residual " << e.residual << ";";
    if (e.classification.kind == EquilibriumKind::UndesiredQI2 && e.classification.subform == "3e") {
      return e;
    }
  }
  throw ConstructionError("no two-pair coincidence balances:" + diag.str());
}

/// Flat seeds, scaled by the mean desired distance, per subform.
std::vector<Eigen::VectorXd> flat_seeds(char subform, double L) {
  std::vector<Eigen::VectorXd> seeds;
  const auto push2 = [&](std::array<std::array<double, 2>, 4> pts) {
    Eigen::VectorXd v(8);
    for (int a = 0; a < 4; ++a) {
      v[2 * a] = L * pts[static_cast<std::size_t>(a)][0];
      v[2 * a + 1] = L * pts[static_cast<std::size_t>(a)][1];
    }
    seeds.push_back(v);
  };
  const auto push1 = [&](std::array<double, 4> x) {
    Eigen::VectorXd v(4);
    for (int a = 0; a < 4; ++a) v[a] = L * x[static_cast<std::size_t>(a)];
    seeds.push_back(v);
  };
  const std::array<double, 3> scales = {1.0, 0.8, 1.25};
  switch (subform) {
    case 'a':
      for (double s : scales) {
        push2({{{-0.5 * s, -0.5 * s}, {0.5 * s, -0.5 * s}, {0.5 * s, 0.5 * s}, {-0.5 * s, 0.5 * s}}});
      }
      break;
    case 'b': {
      const double c = std::sqrt(3.0) / 2.0;
      for (int inside : {2, 3, 1, 0}) {
        for (double s : scales) {
          std::array<std::array<double, 2>, 4> pts{};
          const std::array<std::array<double, 2>, 3> tri = {
              {{-0.5 * s, -c * s / 3.0}, {0.5 * s, -c * s / 3.0}, {0.0, 2.0 * c * s / 3.0}}};
          for (int a = 0, t = 0; a < 4; ++a) {
            pts[static_cast<std::size_t>(a)] =
                a == inside ? std::array<double, 2>{0.0, 0.0} : tri[static_cast<std::size_t>(t++)];
          }
          push2(pts);
        }
      }
      break;
    }
    case 'f':
    case 'g':
    case 'h': {
      const std::array<double, 5> gaps = {0.25, 0.5, 0.75, 1.0, 1.5};
      std::array<int, 4> perm = {0, 1, 2, 3};
      do {
        for (double g1 : gaps) {
          for (double g2 : gaps) {
            for (double g3 : gaps) {
              std::array<double, 3> gap = {g1, g2, g3};
              if (subform == 'f') gap[0] = 0.0;  // first two coincide at an end
              if (subform == 'g') gap[1] = 0.0;  // middle two coincide
              if (subform == 'f' && g1 != gaps[0]) continue;
              if (subform == 'g' && g2 != gaps[0]) continue;
              std::array<double, 4> x{};
              double pos = 0.0;
              for (int a = 0; a < 4; ++a) {
                x[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)])] = pos;
                if (a < 3) pos += gap[static_cast<std::size_t>(a)];
              }
              push1(x);
            }
          }
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      break;
    }
    default: break;
  }
  return seeds;
}

CatalogEntry coplanar_from_seeds(const FormationGraph& graph, const PotentialFamily& family,
                                 char subform, const CoplanarOptions& opt) {
  const bool line = subform == 'f' || subform == 'g' || subform == 'h';
  const FlatSystem sys = flat_system(graph, line ? 1 : 2);
  const std::string label = std::string("3") + subform;
  const auto seeds = flat_seeds(subform, mean_desired(graph));
  int converged = 0;
  std::vector<std::string> reached;
  for (const auto& seed : seeds) {
    std::vector<Eigen::VectorXd> starts;
    try {
      if (!line) starts.push_back(flat_flow(sys, seed, family, opt.flow_steps));
      starts.push_back(seed);
    } catch (const PotentialDomainError&) {
      continue;
    }
    for (const auto& start : starts) {
      PolishResult pr;
      try {
        pr = polish_equilibrium(sys.view(), start, family, opt.tolerance, opt.max_iterations);
      } catch (const PotentialDomainError&) {
        continue;
      }
      if (!(pr.residual < 1e-10)) continue;
      ++converged;
      Eigen::VectorXd centred = pr.p;
      for (int a = 0; a < sys.dim; ++a) {
        double mean = 0.0;
        for (int i = 0; i < sys.nodes; ++i) mean += centred[i * sys.dim + a];
        mean /= sys.nodes;
        for (int i = 0; i < sys.nodes; ++i) centred[i * sys.dim + a] -= mean;
      }
      Realization p = embed(graph, centred, sys.dim);
      place_flex(p, graph, line ? unit(3, 1) : unit(3, 0));
      CatalogEntry e;
      try {
        e = finish(label, std::move(p), graph, family, ConstructionMethod::RootfindCoplanar);
      } catch (const PotentialDomainError&) {
        continue;
      }
      if (e.classification.kind == EquilibriumKind::UndesiredQI2 &&
          e.classification.subform == label) {
        return e;
      }
      const std::string got = e.classification.subform.empty() ? to_string(e.classification.kind)
                                                               : e.classification.subform;
      if (std::find(reached.begin(), reached.end(), got) == reached.end()) reached.push_back(got);
    }
  }
  std::ostringstream os;
  os << "no " << label << " equilibrium found from " << seeds.size() << " seeds (" << converged
     << " polished solves converged";
  if (!reached.empty()) {
    os << "; reached:";
    for (const auto& r : reached) os << ' ' << r;
  }
  os << ")";
  throw ConstructionError(os.str());
}

}  // namespace

CatalogEntry find_coplanar_equilibrium(const FormationGraph& graph, const PotentialFamily& family,
                                       char subform, const CoplanarOptions& opt) {
  require_topology(graph, Topology::TetrahedronFlex3D, "find_coplanar_equilibrium");
  const std::string label = std::string("3") + subform;
  switch (subform) {
    case 'c':
      return guard_domain(label, [&] {
        Realization p(Eigen::VectorXd::Zero(graph.num_nodes() * 3), 3);
        place_flex(p, graph, unit(3, 0));
        auto e = finish(label, std::move(p), graph, family, ConstructionMethod::CoincidenceConstruct);
        expect_class(e, EquilibriumKind::UndesiredQI2, label);
        return e;
      });
    case 'd':
      return guard_domain(label, [&] { return coplanar_coincident_triple(graph, family); });
    case 'e':
      return guard_domain(label, [&] { return coplanar_two_pairs(graph, family); });
    case 'a':
    case 'b':
    case 'f':
    case 'g':
    case 'h':
      return coplanar_from_seeds(graph, family, subform, opt);
    default:
      throw std::invalid_argument("unknown coplanar subform '" + std::string(1, subform) + "'");
  }
}

CatalogEntry capture_equilibrium_from_flow(const Realization& p0, const ClosedLoop& system,
                                           const CaptureCriteria& criteria) {
  if (system.leader.mode() != LeaderMode::None) {
    throw std::invalid_argument("equilibrium capture needs the plain gradient flow");
  }
  IntegrationOptions opt;
  opt.t_end = criteria.t_max;
  opt.step = criteria.step;
  opt.equilibrium_tol = criteria.detect_tol;
  opt.stop_at_equilibrium = true;
  const Trajectory traj = integrate(p0, system, opt);

  std::vector<std::string> notes;
  Eigen::VectorXd start;
  const bool detected =
      std::any_of(traj.events.begin(), traj.events.end(),
                  [](const TrajectoryEvent& e) { return e.kind == EventKind::EquilibriumDetected; });
  if (detected) {
    start = traj.final_state().stacked();
    std::ostringstream os;
    os << "detector fired at t = " << traj.final_time();
    notes.push_back(os.str());
  } else if (criteria.accept_near_miss) {
    const auto& g = traj.gradient_norms;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      if (g[i] <= g[i - 1] && g[i] < g[i + 1]) {
        if (g[i] < criteria.near_miss_tol) {
          start = traj.states[i].stacked();
          std::ostringstream os;
          os << "near miss: first local minimum |grad V| = " << g[i] << " at t = " << traj.times[i];
          notes.push_back(os.str());
        }
        break;
      }
    }
  }
  if (start.size() == 0) {
    std::ostringstream os;
    os << "no equilibrium reached before t = " << criteria.t_max << " (" << to_string(traj.status)
       << ")";
    throw ConstructionError(os.str());
  }

  const PolishResult pr =
      polish_equilibrium(system.graph.view(), start, system.family, criteria.polish_tol);
  Realization p(pr.p, system.graph.dimension());
  auto e = finish("", std::move(p), system.graph, system.family, ConstructionMethod::FlowCapture);
  e.label = e.classification.subform.empty() ? to_string(e.classification.kind)
                                             : e.classification.subform;
  if (e.classification.kind == EquilibriumKind::UndesiredQI1) e.label = "QI1";
  std::ostringstream os;
  os << "Newton polish: " << pr.iterations << " iterations, residual " << pr.residual;
  notes.push_back(os.str());
  e.notes = std::move(notes);
  return e;
}

double rigid_simplex_volume(const Realization& p) {
  const int d = p.dimension();
  Eigen::MatrixXd A(d, d);
  for (int k = 0; k < d; ++k) A.col(k) = p.agent(k + 1) - p.agent(0);
  return A.determinant() / (d == 3 ? 6.0 : 2.0);
}

ShootingResult shoot_to_saddle(const Realization& p0, const ClosedLoop& system, int agent,
                               int axis, double lo, double hi, double probe_time,
                               const StepControl& step, double width_tol, int max_iterations) {
  IntegrationOptions opt;
  opt.t_end = probe_time;
  opt.step = step;
  opt.record_stride = 1 << 30;
  const auto side = [&](double v) {
    Realization p = p0;
    p.agent(agent)[axis] = v;
    const Trajectory t = integrate(p, system, opt);
    return rigid_simplex_volume(t.final_state()) > 0.0;
  };
  const bool s_lo = side(lo);
  if (side(hi) == s_lo) {
    throw ConstructionError("shooting interval does not bracket the stable manifold");
  }
  ShootingResult out;
  for (; out.iterations < max_iterations && hi - lo > width_tol; ++out.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (side(mid) == s_lo ? lo : hi) = mid;
  }
  out.value = 0.5 * (lo + hi);
  out.bracket = hi - lo;
  return out;
}

std::vector<CatalogAttempt> build_catalog(const FormationGraph& graph,
                                          const PotentialFamily& family,
                                          const std::vector<std::string>& labels) {
  std::vector<std::string> wanted = labels;
  if (wanted.empty()) {
    if (graph.topology() == Topology::TriangleFlex2D) {
      wanted = {"2a", "2b", "2c", "QI1"};
    } else if (graph.topology() == Topology::TetrahedronFlex3D) {
      wanted = {"3a", "3b", "3c", "3d", "3e", "3f", "3g", "3h", "QI1"};
    } else {
      throw std::invalid_argument("catalogs exist only for the certified topologies");
    }
  }
  std::vector<CatalogAttempt> out;
  for (const auto& label : wanted) {
    CatalogAttempt a;
    a.label = label;
    try {
      if (label == "QI1") {
        a.entry = construct_flex_collapse(graph, family);
      } else if (label == "2a") {
        a.entry = find_collinear_equilibrium(graph, family);
      } else if (label == "2b") {
        a.entry = construct_coincident_pair_2d(graph, family);
      } else if (label == "2c") {
        a.entry = construct_all_coincident_2d(graph, family);
      } else if (label.size() == 2 && label[0] == '3') {
        a.entry = find_coplanar_equilibrium(graph, family, label[1]);
      } else {
        throw std::invalid_argument("unknown catalog label '" + label + "'");
      }
    } catch (const ConstructionError& err) {
      a.error = err.what();
    } catch (const std::invalid_argument& err) {
      a.error = err.what();
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace flexform
