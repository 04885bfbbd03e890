#include "flexform/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flexform {

namespace {

bool is_complete_on(const std::vector<Edge>& edges, int count) {
  if (static_cast<int>(edges.size()) != count * (count - 1) / 2) return false;
  for (const auto& e : edges) {
    if (e.second >= count) return false;
  }
  return true;
}

}  // namespace

FormationGraph::FormationGraph(int num_nodes, int dimension, std::vector<Edge> edges,
                               std::pair<int, int> flex_edge)
    : num_nodes_(num_nodes), dimension_(dimension), edges_(std::move(edges)) {
  if (num_nodes_ < 2) throw GraphError("a formation graph needs at least two nodes");
  if (dimension_ != 2 && dimension_ != 3) {
    throw GraphError("ambient dimension must be 2 or 3");
  }

  for (auto& e : edges_) {
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= num_nodes_) {
      std::ostringstream os;
      os << "edge (" << e.first + 1 << "," << e.second + 1 << ") references a missing node";
      throw GraphError(os.str());
    }
    if (e.first == e.second) throw GraphError("self-loops are not allowed");
    if (!(e.desired > 0.0) || !std::isfinite(e.desired)) {
      throw GraphError("desired distances must be finite and strictly positive");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.first, a.second) < std::pair(b.first, b.second);
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].first == edges_[k - 1].first && edges_[k].second == edges_[k - 1].second) {
      std::ostringstream os;
      os << "duplicate edge (" << edges_[k].first + 1 << "," << edges_[k].second + 1 << ")";
      throw GraphError(os.str());
    }
  }

  auto [fa, fb] = flex_edge;
  if (fa > fb) std::swap(fa, fb);
  if (fa != num_nodes_ - 2 || fb != num_nodes_ - 1) {
    throw GraphError("the flex edge must join the last rigid node to the last node");
  }

  adjacency_.assign(static_cast<std::size_t>(num_nodes_), {});
  for (int k = 0; k < num_edges(); ++k) {
    const auto& e = edges_[static_cast<std::size_t>(k)];
    adjacency_[static_cast<std::size_t>(e.first)].push_back(e.second);
    adjacency_[static_cast<std::size_t>(e.second)].push_back(e.first);
    if (e.first == fa && e.second == fb) flex_edge_index_ = k;
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());

  if (flex_edge_index_ < 0) throw GraphError("the flex edge is not in the edge list");
  if (adjacency_.back().size() != 1) {
    throw GraphError("the flex node must have exactly one neighbour");
  }

  const auto rigid = rigid_edges();
  if (dimension_ == 2 && num_nodes_ == 4 && is_complete_on(rigid, 3)) {
    topology_ = Topology::TriangleFlex2D;
  } else if (dimension_ == 3 && num_nodes_ == 5 && is_complete_on(rigid, 4)) {
    topology_ = Topology::TetrahedronFlex3D;
  }
}

FormationGraph FormationGraph::triangle_with_flex(double d12, double d13, double d23,
                                                  double d34) {
  return FormationGraph(4, 2, {{0, 1, d12}, {0, 2, d13}, {1, 2, d23}, {2, 3, d34}}, {2, 3});
}

FormationGraph FormationGraph::tetrahedron_with_flex(const std::array<double, 6>& rigid,
                                                     double d45) {
  return FormationGraph(5, 3,
                        {{0, 1, rigid[0]},
                         {0, 2, rigid[1]},
                         {0, 3, rigid[2]},
                         {1, 2, rigid[3]},
                         {1, 3, rigid[4]},
                         {2, 3, rigid[5]},
                         {3, 4, d45}},
                        {3, 4});
}

FormationGraph FormationGraph::uniform(Topology topology, double distance) {
  switch (topology) {
    case Topology::TriangleFlex2D:
      return triangle_with_flex(distance, distance, distance, distance);
    case Topology::TetrahedronFlex3D:
      return tetrahedron_with_flex({distance, distance, distance, distance, distance, distance},
                                   distance);
    case Topology::Generic:
      break;
  }
  throw GraphError("uniform() needs a certified topology");
}

std::vector<Edge> FormationGraph::rigid_edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (int k = 0; k < num_edges(); ++k) {
    if (k != flex_edge_index_) out.push_back(edges_[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::optional<int> FormationGraph::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto it = std::lower_bound(
      edges_.begin(), edges_.end(), std::pair(a, b),
      [](const Edge& e, const std::pair<int, int>& key) {
        return std::pair(e.first, e.second) < key;
      });
  if (it != edges_.end() && it->first == a && it->second == b) {
    return static_cast<int>(it - edges_.begin());
  }
  return std::nullopt;
}

double FormationGraph::desired(int a, int b) const {
  const auto k = edge_index(a, b);
  if (!k) {
    std::ostringstream os;
    os << "no edge between nodes " << a + 1 << " and " << b + 1;
    throw GraphError(os.str());
  }
  return edges_[static_cast<std::size_t>(*k)].desired;
}

Realization::Realization(Eigen::VectorXd positions, int dimension)
    : positions_(std::move(positions)), dimension_(dimension) {
  if (dimension_ < 1) throw DimensionError("realization dimension must be positive");
  if (positions_.size() % dimension_ != 0) {
    throw DimensionError("stacked position length is not a multiple of the dimension");
  }
}

Realization Realization::from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw DimensionError("a realization needs at least one point");
  const auto d = points.front().size();
  Eigen::VectorXd p(static_cast<Eigen::Index>(points.size() * d));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) throw DimensionError("points have mixed dimensions");
    for (std::size_t c = 0; c < d; ++c) p(static_cast<Eigen::Index>(i * d + c)) = points[i][c];
  }
  return Realization(std::move(p), static_cast<int>(d));
}

void require_compatible(const Realization& p, const FormationGraph& graph) {
  if (p.dimension() != graph.dimension() || p.num_agents() != graph.num_nodes()) {
    std::ostringstream os;
    os << "realization has " << p.num_agents() << " agents in dimension " << p.dimension()
       << ", graph expects " << graph.num_nodes() << " in dimension " << graph.dimension();
    throw DimensionError(os.str());
  }
}

Eigen::MatrixXd build_incidence(const EdgeSet& edges) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(edges.num_nodes,
                                            static_cast<Eigen::Index>(edges.edges.size()));
  for (std::size_t k = 0; k < edges.edges.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    b(edges.edges[k].first, col) = 1.0;
    b(edges.edges[k].second, col) = -1.0;
  }
  return b;
}

Eigen::MatrixXd build_incidence(const FormationGraph& graph) {
  return build_incidence(graph.view());
}

Eigen::MatrixXd lifted_incidence(const FormationGraph& graph) {
  const Eigen::MatrixXd b = build_incidence(graph);
  const int d = graph.dimension();
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(b.rows() * d, b.cols() * d);
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      if (b(r, c) != 0.0) {
        lifted.block(r * d, c * d, d, d) = b(r, c) * Eigen::MatrixXd::Identity(d, d);
      }
    }
  }
  return lifted;
}

std::vector<Eigen::VectorXd> relative_positions(const Realization& p,
                                                const FormationGraph& graph) {
  require_compatible(p, graph);
  std::vector<Eigen::VectorXd> z;
  z.reserve(static_cast<std::size_t>(graph.num_edges()));
  for (const auto& e : graph.edges()) z.emplace_back(p.agent(e.first) - p.agent(e.second));
  return z;
}

FeasibilityVerdict check_feasible(const FormationGraph& graph) {
  const int n = graph.num_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const auto ab = graph.edge_index(a, b);
      if (!ab) continue;
      for (int c = b + 1; c < n; ++c) {
        const auto bc = graph.edge_index(b, c);
        const auto ac = graph.edge_index(a, c);
        if (!bc || !ac) continue;
        const double x = graph.edge(*ab).desired;
        const double y = graph.edge(*bc).desired;
        const double w = graph.edge(*ac).desired;
        if (!(x + y > w && y + w > x && w + x > y)) {
          return {false, std::array<int, 3>{a, b, c}};
        }
      }
    }
  }
  return {};
}

}  // namespace flexform
