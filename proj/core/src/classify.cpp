#include "flexform/classify.hpp"

#include "flexform/kernels.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flexform {

std::string to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Desired: return "desired";
    case EquilibriumKind::UndesiredQI1: return "undesired_QI1";
    case EquilibriumKind::UndesiredQI2: return "undesired_QI2";
    case EquilibriumKind::UndesiredOther: return "undesired_other";
    case EquilibriumKind::NotEquilibrium: return "not_equilibrium";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd rigid_points(const Realization& p, const FormationGraph& graph) {
  const int n = graph.num_rigid_nodes();
  const int d = graph.dimension();
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) X.row(i) = p.agent(i).transpose();
  return X;
}

double diameter(const Eigen::MatrixXd& X) {
  double best = 0.0;
  for (Eigen::Index a = 0; a < X.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < X.rows(); ++b) {
      best = std::max(best, (X.row(a) - X.row(b)).norm());
    }
  }
  return best;
}

/// Singular values of the centred rows, padded with zeros to `count`.
Eigen::VectorXd centred_singular_values(const Eigen::MatrixXd& X, int count) {
  const Eigen::RowVectorXd c = X.colwise().mean();
  const Eigen::MatrixXd Y = X.rowwise() - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(count);
  const Eigen::Index k = std::min<Eigen::Index>(count, svd.singularValues().size());
  s.head(k) = svd.singularValues().head(k);
  return s;
}

void note_if_borderline(std::vector<std::string>& notes, const char* what, double value,
                        double threshold) {
  if (threshold <= 0.0) return;
  if (value >= threshold / 10.0 && value <= threshold * 10.0) {
    std::ostringstream os;
    os << what << " = " << value << " is within a factor 10 of its threshold " << threshold;
    notes.push_back(os.str());
  }
}

struct Clusters {
  std::vector<std::vector<int>> groups;  // each sorted; groups ordered by first member
  double closest_separate = INFINITY;    // smallest distance between different groups
  double widest_joined = 0.0;            // largest distance inside a group
};

Clusters cluster(const Eigen::MatrixXd& X, double tol) {
  const int n = static_cast<int>(X.rows());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if ((X.row(a) - X.row(b)).norm() < tol) {
        parent[static_cast<std::size_t>(find(b))] = find(a);
      }
    }
  }
  Clusters out;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    const int r = find(a);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<int>(out.groups.size());
      out.groups.emplace_back();
    }
    out.groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(a);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double dist = (X.row(a) - X.row(b)).norm();
      if (find(a) == find(b)) {
        out.widest_joined = std::max(out.widest_joined, dist);
      } else {
        out.closest_separate = std::min(out.closest_separate, dist);
      }
    }
  }
  return out;
}

/// Coordinates of the rows of X along `axis` (a unit row vector).
Eigen::VectorXd project(const Eigen::MatrixXd& X, const Eigen::RowVectorXd& axis) {
  return X * axis.transpose();
}

void assign_2d(EquilibriumClass& out, const Eigen::MatrixXd& X, const Clusters& cl,
               const Eigen::MatrixXd& frame) {
  if (cl.groups.size() == 1) {
    out.subform = "2c";
    out.subform_name = "all coincident";
    out.roles = {0, 1, 2};
  } else if (cl.groups.size() == 2) {
    const auto& pair = cl.groups[0].size() == 2 ? cl.groups[0] : cl.groups[1];
    const auto& single = cl.groups[0].size() == 2 ? cl.groups[1] : cl.groups[0];
    out.subform = "2b";
    out.subform_name = "coincident pair";
    out.roles = {single[0], pair[0], pair[1]};
  } else {
    const Eigen::VectorXd s = project(X, frame.row(0));
    std::vector<int> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s[a] < s[b]; });
    out.subform = "2a";
    out.subform_name = "distinct collinear";
    out.roles = {std::min(order[0], order[2]), order[1], std::max(order[0], order[2])};
  }
}

void assign_3d(EquilibriumClass& out, const Eigen::MatrixXd& X, const Clusters& cl,
               const Eigen::MatrixXd& frame, double scale, const ClassifyTolerances& tol) {
  const auto& g = cl.groups;
  const Eigen::MatrixXd plane = X * frame.topRows(2).transpose();  // 4 x 2

  if (g.size() == 1) {
    out.subform = "3c";
    out.subform_name = "all coincident";
    out.roles = {0, 1, 2, 3};
    return;
  }
  if (g.size() == 2) {
    if (g[0].size() == 2) {
      out.subform = "3e";
      out.subform_name = "two coincident pairs";
      out.roles = {g[0][0], g[0][1], g[1][0], g[1][1]};
    } else {
      const auto& triple = g[0].size() == 3 ? g[0] : g[1];
      const auto& single = g[0].size() == 3 ? g[1] : g[0];
      out.subform = "3d";
      out.subform_name = "coincident triple";
      out.roles = {triple[0], triple[1], triple[2], single[0]};
    }
    return;
  }

  if (g.size() == 3) {
    std::vector<int> pair, singles;
    for (const auto& grp : g) {
      if (grp.size() == 2) pair = grp;
      else singles.push_back(grp[0]);
    }
    Eigen::MatrixXd reps(3, 2);
    reps.row(0) = 0.5 * (plane.row(pair[0]) + plane.row(pair[1]));
    reps.row(1) = plane.row(singles[0]);
    reps.row(2) = plane.row(singles[1]);
    const Eigen::VectorXd sv = centred_singular_values(reps, 2);
    note_if_borderline(out.notes, "three-cluster line residual", sv[1] / scale, tol.geometry);
    if (sv[1] / scale > tol.geometry) {
      out.notes.push_back(
          "coincident pair with two further agents not on a common line; no subform applies");
      return;
    }
    const Eigen::RowVectorXd c = reps.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(reps.rowwise() - c, Eigen::ComputeThinV);
    const Eigen::VectorXd s = reps * svd.matrixV().col(0);
    const bool pair_in_middle = (s[0] - s[1]) * (s[0] - s[2]) < 0.0;
    if (pair_in_middle) {
      out.subform = "3g";
      out.subform_name = "collinear, pair in the middle";
      out.roles = {pair[0], pair[1], singles[0], singles[1]};
    } else {
      const bool first_near = std::abs(s[1] - s[0]) < std::abs(s[2] - s[0]);
      out.subform = "3f";
      out.subform_name = "collinear, pair at an end";
      out.roles = {pair[0], pair[1], first_near ? singles[0] : singles[1],
                   first_near ? singles[1] : singles[0]};
    }
    return;
  }

  // four distinct positions
  const Eigen::VectorXd sv = centred_singular_values(plane, 2);
  note_if_borderline(out.notes, "four-point line residual", sv[1] / scale, tol.geometry);
  if (sv[1] / scale <= tol.geometry) {
    const Eigen::RowVectorXd c = plane.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(plane.rowwise() - c, Eigen::ComputeThinV);
    const Eigen::VectorXd t = plane * svd.matrixV().col(0);
    std::vector<int> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t[a] < t[b]; });
    if (order[3] < order[0]) std::reverse(order.begin(), order.end());
    out.subform = "3h";
    out.subform_name = "distinct collinear";
    out.roles = order;
    return;
  }

  // one agent strictly inside the triangle of the other three?
  int inside = -1;
  double closest_to_boundary = INFINITY;
  for (int q = 0; q < 4; ++q) {
    std::vector<int> tri;
    for (int a = 0; a < 4; ++a) {
      if (a != q) tri.push_back(a);
    }
    Eigen::Matrix2d A;
    A.col(0) = (plane.row(tri[1]) - plane.row(tri[0])).transpose();
    A.col(1) = (plane.row(tri[2]) - plane.row(tri[0])).transpose();
    if (std::abs(A.determinant()) < 1e-300) continue;
    const Eigen::Vector2d lam = A.colPivHouseholderQr().solve(
        (plane.row(q) - plane.row(tri[0])).transpose());
    const double l0 = 1.0 - lam.sum();
    const double margin = std::min({l0, lam[0], lam[1]});
    closest_to_boundary = std::min(closest_to_boundary, std::abs(margin));
    if (margin > 0.0) inside = q;
  }
  note_if_borderline(out.notes, "barycentric margin", closest_to_boundary, tol.geometry);
  if (inside >= 0) {
    std::vector<int> rest;
    for (int a = 0; a < 4; ++a) {
      if (a != inside) rest.push_back(a);
    }
    out.subform = "3b";
    out.subform_name = "one agent inside the triangle of the others";
    out.roles = {rest[0], rest[1], inside, rest[2]};
    return;
  }
  const Eigen::RowVector2d c = plane.colwise().mean();
  std::vector<int> order{0, 1, 2, 3};
  std::vector<double> ang(4);
  for (int a = 0; a < 4; ++a) {
    ang[static_cast<std::size_t>(a)] = std::atan2(plane(a, 1) - c[1], plane(a, 0) - c[0]);
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ang[static_cast<std::size_t>(a)] < ang[static_cast<std::size_t>(b)]; });
  std::rotate(order.begin(), std::find(order.begin(), order.end(), 0), order.end());
  if (order[3] < order[1]) std::reverse(order.begin() + 1, order.end());
  out.subform = "3a";
  out.subform_name = "convex quadrilateral";
  out.roles = order;
}

}  // namespace

Eigen::MatrixXd alignment_frame(const Realization& p, const FormationGraph& graph,
                                double geometry_tol) {
  require_compatible(p, graph);
  const int d = graph.dimension();
  const Eigen::MatrixXd X = rigid_points(p, graph);
  const double scale = std::max(1.0, diameter(X));
  const Eigen::RowVectorXd c = X.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X.rowwise() - c, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();

  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index k = 0; k < sv.size() && k < d - 1; ++k) {
    if (sv[k] / scale > geometry_tol) basis.push_back(svd.matrixV().col(k));
  }
  const auto add_if_independent = [&](Eigen::VectorXd v) {
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-9 * scale) basis.push_back(v.normalized());
  };
  if (static_cast<int>(basis.size()) < d - 1) {
    add_if_independent(p.agent(graph.flex_node()) - p.agent(graph.anchor_node()));
  }
  for (int k = 0; static_cast<int>(basis.size()) < d && k < d; ++k) {
    add_if_independent(svd.matrixV().col(k));
  }
  for (int k = 0; static_cast<int>(basis.size()) < d && k < d; ++k) {
    add_if_independent(Eigen::VectorXd::Unit(d, k));
  }

  Eigen::MatrixXd R(d, d);
  for (int k = 0; k < d; ++k) R.row(k) = basis[static_cast<std::size_t>(k)].transpose();
  if (R.determinant() < 0.0) R.row(d - 1) *= -1.0;
  return R;
}

EquilibriumClass classify(const Realization& p, const FormationGraph& graph,
                          const PotentialFamily& family, const ClassifyTolerances& tol) {
  require_compatible(p, graph);
  EquilibriumClass out;
  const int d = graph.dimension();
  const auto states = kernels::edge_states(graph.view(), p.stacked(), family);

  out.residual = kernels::balance_residual(graph.view(), p.stacked(), family);
  for (const auto& s : states) out.max_shape_error = std::max(out.max_shape_error, std::abs(s.error));
  out.flex_length = states[static_cast<std::size_t>(graph.flex_edge_index())].z.norm();

  const Eigen::MatrixXd X = rigid_points(p, graph);
  out.scale = std::max(1.0, diameter(X));
  const Eigen::VectorXd sv = centred_singular_values(X, d);
  out.flatness = sv[d - 1] / out.scale;

  note_if_borderline(out.notes, "balance residual", out.residual, tol.equilibrium);
  if (!(out.residual < tol.equilibrium)) {
    out.kind = EquilibriumKind::NotEquilibrium;
    return out;
  }
  note_if_borderline(out.notes, "max |e|", out.max_shape_error, tol.shape);
  if (out.max_shape_error < tol.shape) {
    out.kind = EquilibriumKind::Desired;
    return out;
  }
  note_if_borderline(out.notes, "flex edge length", out.flex_length / out.scale, tol.position);
  if (out.flex_length / out.scale < tol.position) {
    out.kind = EquilibriumKind::UndesiredQI1;
    return out;
  }
  note_if_borderline(out.notes, "flatness", out.flatness, tol.geometry);
  if (!(out.flatness < tol.geometry)) {
    out.kind = EquilibriumKind::UndesiredOther;
    out.notes.push_back("undesired equilibrium whose rigid agents are not flat");
    return out;
  }
  out.kind = EquilibriumKind::UndesiredQI2;

  const Clusters cl = cluster(X, tol.position * out.scale);
  if (std::isfinite(cl.closest_separate)) {
    note_if_borderline(out.notes, "closest distinct agents", cl.closest_separate / out.scale,
                       tol.position);
  }
  if (cl.widest_joined > 0.0) {
    note_if_borderline(out.notes, "widest coincident pair", cl.widest_joined / out.scale,
                       tol.position);
  }
  const Eigen::MatrixXd frame = alignment_frame(p, graph, tol.geometry);
  switch (graph.topology()) {
    case Topology::TriangleFlex2D: assign_2d(out, X, cl, frame); break;
    case Topology::TetrahedronFlex3D: assign_3d(out, X, cl, frame, out.scale, tol); break;
    case Topology::Generic:
      out.notes.push_back("no subform taxonomy for this topology");
      break;
  }
  return out;
}

}  // namespace flexform
