#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flexform {

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An edge of the oriented edge set, zero-based, with `first < second`.
struct Edge {
  int first = 0;
  int second = 0;
  double desired = 0.0;
};

/// Non-owning view over an edge list. The numerical kernels work on this so
/// they can also run on reduced problems (a rigid subgraph on a line or in a
/// plane) that do not carry the flex-node structure.
struct EdgeSet {
  int num_nodes = 0;
  int dimension = 0;
  std::span<const Edge> edges;
};

enum class Topology {
  Generic,
  TriangleFlex2D,     // rigid triangle on nodes 1..3 in the plane, flex node 4
  TetrahedronFlex3D,  // rigid tetrahedron on nodes 1..4 in space, flex node 5
};

/// A rigid graph on nodes 0..N-1 plus one flex node N attached to node N-1.
///
/// Edges are kept in lexicographic order of (first, second); that order is
/// the column order of the incidence matrix and the block order of every
/// per-edge matrix derived from it.
class FormationGraph {
 public:
  /// `flex_edge` is zero-based and must equal (num_nodes-2, num_nodes-1).
  /// Edge endpoints may be given in either order; they are normalized.
  FormationGraph(int num_nodes, int dimension, std::vector<Edge> edges,
                 std::pair<int, int> flex_edge);

  /// Triangle (1,2,3) plus flex node 4 hanging off node 3.
  static FormationGraph triangle_with_flex(double d12, double d13, double d23,
                                           double d34);
  /// Tetrahedron (1,2,3,4) plus flex node 5 hanging off node 4. `rigid` is
  /// ordered (12, 13, 14, 23, 24, 34).
  static FormationGraph tetrahedron_with_flex(const std::array<double, 6>& rigid,
                                              double d45);
  static FormationGraph uniform(Topology topology, double distance);

  int num_nodes() const { return num_nodes_; }
  int num_rigid_nodes() const { return num_nodes_ - 1; }
  int dimension() const { return dimension_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int flex_node() const { return num_nodes_ - 1; }
  int anchor_node() const { return num_nodes_ - 2; }
  int flex_edge_index() const { return flex_edge_index_; }
  const Edge& flex_edge() const { return edges_[flex_edge_index_]; }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int k) const { return edges_.at(static_cast<std::size_t>(k)); }
  EdgeSet view() const { return {num_nodes_, dimension_, edges_}; }
  /// Edges of the rigid subgraph only (every edge except the flex edge).
  std::vector<Edge> rigid_edges() const;

  /// Index into edges() of the edge joining a and b, in either order.
  std::optional<int> edge_index(int a, int b) const;
  /// Desired length of edge {a, b}; throws GraphError when absent.
  double desired(int a, int b) const;
  const std::vector<int>& neighbors(int node) const {
    return adjacency_.at(static_cast<std::size_t>(node));
  }

  Topology topology() const { return topology_; }
  /// True for the two topologies with an instability certificate.
  bool certified() const { return topology_ != Topology::Generic; }

 private:
  int num_nodes_;
  int dimension_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  int flex_edge_index_ = -1;
  Topology topology_ = Topology::Generic;
};

/// Stacked agent positions p = [p_1; ...; p_n], each block of size `dimension`.
class Realization {
 public:
  Realization() = default;
  Realization(Eigen::VectorXd positions, int dimension);
  /// Build from a list of points, all of the same dimension.
  static Realization from_points(const std::vector<std::vector<double>>& points);

  int dimension() const { return dimension_; }
  int num_agents() const {
    return dimension_ == 0 ? 0 : static_cast<int>(positions_.size()) / dimension_;
  }

  auto agent(int i) const { return positions_.segment(i * dimension_, dimension_); }
  auto agent(int i) { return positions_.segment(i * dimension_, dimension_); }

  const Eigen::VectorXd& stacked() const { return positions_; }
  Eigen::VectorXd& stacked() { return positions_; }

 private:
  Eigen::VectorXd positions_;
  int dimension_ = 0;
};

/// Throws DimensionError unless `p` has one d-vector per node of `graph`.
void require_compatible(const Realization& p, const FormationGraph& graph);

/// Node-by-edge incidence matrix. Column k belongs to edge (i, j), i < j, and
/// carries +1 at row i and -1 at row j, so that (B^T p)_k = p_i - p_j.
Eigen::MatrixXd build_incidence(const FormationGraph& graph);
Eigen::MatrixXd build_incidence(const EdgeSet& edges);

/// B (x) I_d.
Eigen::MatrixXd lifted_incidence(const FormationGraph& graph);

/// z_k = p_i - p_j for every edge, in edge order.
std::vector<Eigen::VectorXd> relative_positions(const Realization& p,
                                                const FormationGraph& graph);

struct FeasibilityVerdict {
  bool feasible = true;
  /// Zero-based nodes (a, b, c) of the first 3-cycle that fails a strict
  /// triangle inequality.
  std::optional<std::array<int, 3>> violating;
};

/// Strict triangle inequalities on every 3-cycle present in the graph.
FeasibilityVerdict check_feasible(const FormationGraph& graph);

}  // namespace flexform
