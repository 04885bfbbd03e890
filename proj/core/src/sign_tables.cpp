#include "flexform/kernels.hpp"
#include "flexform/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace flexform {

bool SignReport::all_pass() const {
  return std::all_of(claims.begin(), claims.end(), [](const SignClaim& c) { return c.pass; });
}

int SignReport::passed() const {
  return static_cast<int>(
      std::count_if(claims.begin(), claims.end(), [](const SignClaim& c) { return c.pass; }));
}

namespace {

class Table {
 public:
  Table(const std::vector<int>& roles, std::map<std::pair<int, int>, double> g, double band)
      : roles_(roles), g_(std::move(g)), band_(band) {}

  /// g for a role pair such as "ij".
  double g(const char* pair) const {
    const int a = roles_.at(static_cast<std::size_t>(pair[0] - 'i'));
    const int b = roles_.at(static_cast<std::size_t>(pair[1] - 'i'));
    return g_.at({std::min(a, b), std::max(a, b)});
  }

  double sum(std::initializer_list<const char*> pairs) const {
    double s = 0.0;
    for (const char* p : pairs) s += g(p);
    return s;
  }

  static std::string text(std::initializer_list<const char*> pairs, SignRelation rel) {
    std::string out;
    for (const char* p : pairs) {
      if (!out.empty()) out += " + ";
      out += "g_";
      out += p;
    }
    switch (rel) {
      case SignRelation::Negative: return out + " < 0";
      case SignRelation::Positive: return out + " > 0";
      case SignRelation::Zero: return out + " = 0";
    }
    return out;
  }

  SignClaim make(std::string statement, SignRelation rel, double value) const {
    SignClaim c;
    c.statement = std::move(statement);
    c.relation = rel;
    c.value = value;
    switch (rel) {
      case SignRelation::Negative: c.margin = -value - band_; break;
      case SignRelation::Positive: c.margin = value - band_; break;
      case SignRelation::Zero: c.margin = band_ - std::abs(value); break;
    }
    c.pass = c.margin > 0.0 || (rel == SignRelation::Zero && c.margin >= 0.0);
    return c;
  }

  void add(std::vector<SignClaim>& out, std::initializer_list<const char*> pairs,
           SignRelation rel) const {
    out.push_back(make(text(pairs, rel), rel, sum(pairs)));
  }

  double band() const { return band_; }

 private:
  std::vector<int> roles_;
  std::map<std::pair<int, int>, double> g_;
  double band_;
};

constexpr auto Neg = SignRelation::Negative;
constexpr auto Pos = SignRelation::Positive;
constexpr auto Zero = SignRelation::Zero;

}  // namespace

SignReport verify_sign_properties(const Realization& p, const FormationGraph& graph,
                                  const PotentialFamily& family, const EquilibriumClass& cls) {
  require_compatible(p, graph);
  const bool is_2d = cls.subform.size() == 2 && cls.subform[0] == '2';
  const bool is_3d = cls.subform.size() == 2 && cls.subform[0] == '3';
  if (cls.kind != EquilibriumKind::UndesiredQI2 || !(is_2d || is_3d)) {
    throw SubformMismatch("sign tables apply only to collinear or coplanar equilibria with a subform");
  }
  const std::size_t need = is_2d ? 3 : 4;
  if (cls.roles.size() != need ||
      (is_2d && graph.topology() != Topology::TriangleFlex2D) ||
      (is_3d && graph.topology() != Topology::TetrahedronFlex3D)) {
    throw SubformMismatch("subform " + cls.subform + " does not match the graph topology");
  }

  const auto states = kernels::edge_states(graph.view(), p.stacked(), family);
  std::map<std::pair<int, int>, double> g;
  double gmax = 0.0;
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    const double gk = states[static_cast<std::size_t>(k)].g;
    g[{e.first, e.second}] = gk;
    gmax = std::max(gmax, std::abs(gk));
  }

  SignReport rep;
  rep.subform = cls.subform;
  rep.roles = cls.roles;
  rep.zero_band = 1e-9 * std::max(1.0, gmax);
  const Table t(cls.roles, std::move(g), rep.zero_band);
  auto& c = rep.claims;
  const char s = cls.subform[1];

  if (is_2d) {
    switch (s) {
      case 'a':
        t.add(c, {"ij"}, Neg);
        t.add(c, {"jk"}, Neg);
        t.add(c, {"ik"}, Pos);
        t.add(c, {"ij", "ik"}, Neg);
        t.add(c, {"jk", "ik"}, Neg);
        break;
      case 'b':
        t.add(c, {"jk"}, Neg);
        t.add(c, {"ij"}, Zero);
        t.add(c, {"ik"}, Zero);
        break;
      case 'c':
        t.add(c, {"ij"}, Neg);
        t.add(c, {"jk"}, Neg);
        t.add(c, {"ik"}, Neg);
        break;
      default: throw SubformMismatch("unknown subform " + cls.subform);
    }
    return rep;
  }

  switch (s) {
    case 'a':
      for (const char* e : {"ij", "jk", "kl", "il"}) t.add(c, {e}, Neg);
      t.add(c, {"ik"}, Pos);
      t.add(c, {"jl"}, Pos);
      t.add(c, {"ij", "ik", "il"}, Neg);
      t.add(c, {"ij", "jk", "jl"}, Neg);
      t.add(c, {"ik", "jk", "kl"}, Neg);
      t.add(c, {"il", "jl", "kl"}, Neg);
      break;
    case 'b':
      for (const char* e : {"ik", "jk", "kl"}) t.add(c, {e}, Neg);
      for (const char* e : {"ij", "il", "jl"}) t.add(c, {e}, Pos);
      break;
    case 'c':
      for (const char* e : {"ij", "ik", "il", "jk", "jl", "kl"}) t.add(c, {e}, Neg);
      break;
    case 'd':
      for (const char* e : {"il", "jl", "kl"}) t.add(c, {e}, Zero);
      for (const char* e : {"ij", "jk", "ik"}) t.add(c, {e}, Neg);
      break;
    case 'e':
      t.add(c, {"ik", "il"}, Zero);
      t.add(c, {"jk", "jl"}, Zero);
      t.add(c, {"ik", "jk"}, Zero);
      t.add(c, {"il", "jl"}, Zero);
      t.add(c, {"ij"}, Neg);
      t.add(c, {"kl"}, Neg);
      break;
    case 'f': {
      t.add(c, {"il", "jl", "kl"}, Neg);
      const double a = t.sum({"ij", "ik", "il"});
      const double b = t.sum({"ij", "jk", "jl"});
      c.push_back(t.make("g_ij + g_ik + g_il < 0 or g_ij + g_jk + g_jl < 0", Neg, std::min(a, b)));
      break;
    }
    case 'g':
      t.add(c, {"il", "jl", "kl"}, Neg);
      t.add(c, {"ik", "jk", "kl"}, Neg);
      break;
    case 'h': {
      t.add(c, {"il", "jl", "kl"}, Neg);
      const double gij = t.g("ij");
      if (gij < -t.band()) {
        c.push_back(t.make("g_ij < 0 => g_ij + g_ik + g_il < 0", Neg, t.sum({"ij", "ik", "il"})));
      } else if (gij > t.band()) {
        c.push_back(t.make("g_ij > 0 => g_ik + g_jk + g_kl < 0", Neg, t.sum({"ik", "jk", "kl"})));
      } else {
        c.push_back(t.make("g_ij = 0 => g_ij + g_jk + g_jl < 0", Neg, t.sum({"ij", "jk", "jl"})));
      }
      break;
    }
    default: throw SubformMismatch("unknown subform " + cls.subform);
  }
  return rep;
}

}  // namespace flexform
