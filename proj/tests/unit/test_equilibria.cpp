#include "flexform/controller.hpp"
#include "flexform/equilibria.hpp"
#include "flexform/kernels.hpp"
#include "flexform/stability.hpp"

#include "oracle.hpp"
#include "shot.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace flexform;

namespace {

const auto kQuad = PotentialFamily::quadratic();
FormationGraph triangle() { return FormationGraph::uniform(Topology::TriangleFlex2D, 4.0); }
FormationGraph tetra() { return FormationGraph::uniform(Topology::TetrahedronFlex3D, 4.0); }

double dist2(const Realization& p, int a, int b) { return (p.agent(a) - p.agent(b)).squaredNorm(); }

double residual(const Realization& p, const FormationGraph& g, const PotentialFamily& f) {
  return kernels::balance_residual(g.view(), p.stacked(), f);
}

std::vector<double> sorted_rigid_distances(const Realization& p, int n) {
  std::vector<double> out;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) out.push_back(dist2(p, a, b));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Desired, TrilaterationHitsAllDistances) {
  const auto g3 = FormationGraph::tetrahedron_with_flex({5, 7, 6, 5, 6, 4}, 3.0);
  for (const auto& g : {triangle(), tetra(), g3}) {
    const auto p = realize_desired(g);
    for (const auto& e : g.edges()) EXPECT_NEAR(std::sqrt(dist2(p, e.first, e.second)), e.desired, 1e-12);
  }
}

TEST(Collinear, GapsMatchClosedForm) {
  // End agent balance with equal gaps s: (s^2 - 16) + 2 (4 s^2 - 16) = 0.
  const double s = 4.0 / std::sqrt(3.0);
  const auto g = triangle();
  const auto e = find_collinear_equilibrium(g, kQuad);
  EXPECT_EQ(e.method, ConstructionMethod::RootfindCollinear);
  EXPECT_EQ(e.classification.subform, "2a");
  EXPECT_LT(e.residual, 1e-12);
  EXPECT_NEAR(std::sqrt(dist2(e.p, 0, 2)), s, 1e-10);
  EXPECT_NEAR(std::sqrt(dist2(e.p, 1, 2)), s, 1e-10);
  EXPECT_NEAR(std::sqrt(dist2(e.p, 2, 3)), 4.0, 1e-10);
}

TEST(Collinear, OtherMiddleAgentAndFlexOnAxis) {
  const auto g = FormationGraph::triangle_with_flex(4.0, 5.0, 3.5, 2.0);
  for (int middle : {0, 1}) {
    CollinearOptions o;
    o.middle = middle;
    o.flex_on_axis = middle == 0;
    const auto e = find_collinear_equilibrium(g, kQuad, o);
    EXPECT_LT(e.residual, 1e-12);
    EXPECT_EQ(e.classification.roles[1], middle);
  }
  // With agent 3 in the middle the gap equations have no positive root for
  // these lengths (checked with an independent multi-start solve).
  CollinearOptions o;
  o.middle = 2;
  EXPECT_THROW(find_collinear_equilibrium(g, kQuad, o), ConstructionError);
}

TEST(Collinear, RationalFamily) {
  const auto e = find_collinear_equilibrium(triangle(), PotentialFamily::rational());
  EXPECT_LT(e.residual, 1e-12);
  EXPECT_EQ(e.classification.subform, "2a");
  // The same geometry is not balanced under the quadratic family.
  EXPECT_GT(residual(e.p, triangle(), kQuad), 1e-3);
}

TEST(Coincidence, PlanarConstructions) {
  const auto g = triangle();
  const auto b = construct_coincident_pair_2d(g, kQuad);
  EXPECT_EQ(b.residual, 0.0);
  EXPECT_EQ(b.classification.subform, "2b");
  EXPECT_EQ(dist2(b.p, 1, 2), 0.0);
  const auto c = construct_all_coincident_2d(g, kQuad);
  EXPECT_EQ(c.residual, 0.0);
  EXPECT_EQ(c.classification.subform, "2c");
  const auto q = construct_flex_collapse(g, kQuad);
  EXPECT_EQ(q.classification.kind, EquilibriumKind::UndesiredQI1);
  EXPECT_LT(q.residual, 1e-12);
}

TEST(Coincidence, PairNeedsEqualDistances) {
  const auto g = FormationGraph::triangle_with_flex(4.0, 5.0, 3.5, 2.0);
  EXPECT_THROW(construct_coincident_pair_2d(g, kQuad, {1, 2}), ConstructionError);
}

TEST(Coincidence, RationalCannotEvaluateCoincidence) {
  EXPECT_THROW(construct_all_coincident_2d(triangle(), PotentialFamily::rational()), ConstructionError);
}

TEST(CoincidenceProperty, FamilyIndependent) {
  const auto quartic = oracle::quartic();
  const auto g2 = triangle();
  const auto g3 = tetra();
  std::vector<std::pair<FormationGraph, CatalogEntry>> built;
  built.emplace_back(g2, construct_coincident_pair_2d(g2, kQuad));
  built.emplace_back(g2, construct_all_coincident_2d(g2, kQuad));
  for (char s : {'c', 'd', 'e'}) built.emplace_back(g3, find_coplanar_equilibrium(g3, kQuad, s));
  for (const auto& [g, e] : built) {
    EXPECT_LT(residual(e.p, g, kQuad), 1e-12) << e.label;
    EXPECT_LT(residual(e.p, g, quartic), 1e-12) << e.label;
  }
  // Built with the quartic family, the geometry is the same.
  const auto e3 = find_coplanar_equilibrium(g3, quartic, 'e');
  EXPECT_NEAR(std::sqrt(dist2(e3.p, e3.classification.roles[0], e3.classification.roles[2])), 4.0, 1e-10);
}

TEST(Coplanar, ConvexQuadrilateralIsSquare) {
  // Square of side a: (a^2 - 16) + (2 a^2 - 16) = 0.
  const auto e = find_coplanar_equilibrium(tetra(), kQuad, 'a');
  EXPECT_EQ(e.classification.subform, "3a");
  EXPECT_LT(e.residual, 1e-12);
  const auto d = sorted_rigid_distances(e.p, 4);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(d[static_cast<std::size_t>(k)], 32.0 / 3.0, 1e-9);
  for (int k = 4; k < 6; ++k) EXPECT_NEAR(d[static_cast<std::size_t>(k)], 64.0 / 3.0, 1e-9);
}

TEST(Coplanar, InteriorAgentAtCentroid) {
  // Triangle side^2 s: 3 (s - 16) + (s/3 - 16) = 0.
  const auto e = find_coplanar_equilibrium(tetra(), kQuad, 'b');
  EXPECT_EQ(e.classification.subform, "3b");
  EXPECT_LT(e.residual, 1e-10);
  const auto d = sorted_rigid_distances(e.p, 4);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(d[static_cast<std::size_t>(k)], 19.2 / 3.0, 1e-9);
  for (int k = 3; k < 6; ++k) EXPECT_NEAR(d[static_cast<std::size_t>(k)], 19.2, 1e-9);
}

TEST(Coplanar, AllCoincident) {
  const auto g = tetra();
  const auto e = find_coplanar_equilibrium(g, kQuad, 'c');
  EXPECT_EQ(e.residual, 0.0);
  const auto r = analyze(e.p, g, kQuad);
  for (int k = 0; k < g.num_edges(); ++k) {
    if (k == g.flex_edge_index()) continue;
    EXPECT_EQ(r.bundle.edges[static_cast<std::size_t>(k)].g, -16.0);
  }
}

TEST(Coplanar, TwoPairsAtDesiredSeparation) {
  const auto e = find_coplanar_equilibrium(tetra(), kQuad, 'e');
  EXPECT_EQ(e.classification.subform, "3e");
  const auto& r = e.classification.roles;
  EXPECT_EQ(dist2(e.p, r[0], r[1]), 0.0);
  EXPECT_EQ(dist2(e.p, r[2], r[3]), 0.0);
  EXPECT_NEAR(dist2(e.p, r[0], r[2]), 16.0, 1e-12);
  const auto rep = analyze(e.p, tetra(), kQuad);
  ASSERT_TRUE(rep.signs);
  for (const auto& c : rep.signs->claims) {
    if (c.relation == SignRelation::Zero) {
      EXPECT_LT(std::abs(c.value), 1e-12);
    }
  }
}

TEST(Coplanar, PairInTheMiddleOfALine) {
  // k at -s, pair at 0, l at +s: 2 (s^2 - 16) + 2 (4 s^2 - 16) = 0.
  const auto e = find_coplanar_equilibrium(tetra(), kQuad, 'g');
  EXPECT_EQ(e.classification.subform, "3g");
  EXPECT_LT(e.residual, 1e-12);
  const auto& r = e.classification.roles;
  EXPECT_LT(dist2(e.p, r[0], r[1]), 1e-20);
  EXPECT_NEAR(dist2(e.p, r[0], r[2]), 6.4, 1e-9);
  EXPECT_NEAR(dist2(e.p, r[0], r[3]), 6.4, 1e-9);
}

TEST(Coplanar, LineSubformsAbsentForUniformDistances) {
  EXPECT_THROW(find_coplanar_equilibrium(tetra(), kQuad, 'f'), ConstructionError);
  EXPECT_THROW(find_coplanar_equilibrium(tetra(), kQuad, 'h'), ConstructionError);
}

TEST(Coplanar, LineSubformsForOtherDistanceSets) {
  const auto gf = FormationGraph::tetrahedron_with_flex({7, 6, 6, 6, 6, 7}, 4.0);
  const auto f = find_coplanar_equilibrium(gf, kQuad, 'f');
  EXPECT_EQ(f.classification.subform, "3f");
  EXPECT_LT(f.residual, 1e-12);
  const auto gh = FormationGraph::tetrahedron_with_flex({5, 7, 6, 5, 6, 4}, 4.0);
  const auto h = find_coplanar_equilibrium(gh, kQuad, 'h');
  EXPECT_EQ(h.classification.subform, "3h");
  EXPECT_LT(h.residual, 1e-12);
  for (const auto& [g, e] : {std::pair{gf, f}, std::pair{gh, h}}) {
    const auto r = analyze(e.p, g, kQuad);
    ASSERT_TRUE(r.signs);
    EXPECT_TRUE(r.signs->all_pass()) << e.label;
    EXPECT_TRUE(r.witness) << e.label;
  }
}

TEST(Coplanar, UnknownSubform) {
  EXPECT_THROW(find_coplanar_equilibrium(tetra(), kQuad, 'z'), std::invalid_argument);
}

TEST(Polish, ConvergesFromNearbyPoint) {
  const auto g = triangle();
  const auto e = find_collinear_equilibrium(g, kQuad);
  Eigen::VectorXd p = e.p.stacked();
  p[1] += 1e-4;
  p[4] -= 2e-4;
  const auto r = polish_equilibrium(g.view(), p, kQuad);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(Capture, PlanarAndSpatialSaddles) {
  const auto g2 = triangle();
  const ClosedLoop s2{g2, kQuad, {}};
  const auto e2 = capture_equilibrium_from_flow(shot::planar(s2), s2);
  EXPECT_EQ(e2.method, ConstructionMethod::FlowCapture);
  EXPECT_EQ(e2.classification.subform, "2a");
  EXPECT_LT(e2.residual, 1e-9);
  EXPECT_NEAR(std::sqrt(dist2(e2.p, 2, 3)), 4.0, 1e-6);

  const auto g3 = tetra();
  const ClosedLoop s3{g3, kQuad, {}};
  const auto e3 = capture_equilibrium_from_flow(shot::spatial(s3), s3);
  EXPECT_EQ(e3.classification.kind, EquilibriumKind::UndesiredQI2);
  EXPECT_EQ(e3.classification.subform, "3b");
  EXPECT_LT(e3.residual, 1e-9);
}

TEST(Capture, LiteralStartsMissTheSaddle) {
  const auto g2 = triangle();
  const auto e2 = capture_equilibrium_from_flow(Realization(oracle::planar_start(), 2), {g2, kQuad, {}});
  EXPECT_EQ(e2.classification.kind, EquilibriumKind::Desired);
  const auto g3 = tetra();
  const auto e3 = capture_equilibrium_from_flow(Realization(oracle::spatial_start(), 3), {g3, kQuad, {}});
  EXPECT_EQ(e3.classification.kind, EquilibriumKind::Desired);
}

TEST(Capture, DesiredStartIsDesired) {
  const auto g = tetra();
  const auto e = capture_equilibrium_from_flow(realize_desired(g), {g, kQuad, {}});
  EXPECT_EQ(e.classification.kind, EquilibriumKind::Desired);
}

TEST(Capture, RejectsLeader) {
  const auto g = triangle();
  const ClosedLoop sys{g, kQuad, LeaderSpec::target(5.0, Eigen::Vector2d(10, 10))};
  EXPECT_THROW(capture_equilibrium_from_flow(Realization(oracle::planar_start(), 2), sys), std::invalid_argument);
}

TEST(Shooting, FindsStableManifoldOfPlanarSaddle) {
  const auto g = triangle();
  const ClosedLoop sys{g, kQuad, {}};
  const auto r = shoot_to_saddle(Realization(oracle::planar_start(), 2), sys, 3, 1, 9.2, 9.25, 1.5);
  EXPECT_GT(r.value, 9.2);
  EXPECT_LT(r.value, 9.228);
  EXPECT_LT(r.bracket, 1e-10);
  // The refined start lingers at a balanced collinear state before leaving.
  IntegrationOptions opt;
  opt.t_end = 1.0;
  opt.step = {StepMode::Fixed, 2.5e-4};
  Realization p(oracle::planar_start(r.value), 2);
  const auto traj = integrate(p, sys, opt);
  EXPECT_LT(*std::min_element(traj.gradient_norms.begin(), traj.gradient_norms.end()), 1e-6);
  // A halved step moves the manifold crossing only slightly.
  const auto fine = shoot_to_saddle(Realization(oracle::planar_start(), 2), sys, 3, 1, 9.2, 9.25, 1.5,
                                    {StepMode::Fixed, 1.25e-4});
  EXPECT_NEAR(fine.value, r.value, 1e-3);
}

TEST(Shooting, RequiresABracket) {
  const auto g = triangle();
  EXPECT_THROW(shoot_to_saddle(Realization(oracle::planar_start(), 2), {g, kQuad, {}}, 3, 1, 9.3, 9.4, 1.5),
               ConstructionError);
}

TEST(Catalog, PlanarAndSpatialCoverage) {
  const auto c2 = build_catalog(triangle(), kQuad);
  ASSERT_EQ(c2.size(), 4u);
  for (const auto& a : c2) EXPECT_TRUE(a.entry) << a.label << ": " << a.error;
  const auto c3 = build_catalog(tetra(), kQuad);
  ASSERT_EQ(c3.size(), 9u);
  for (const auto& a : c3) {
    if (a.label == "3f" || a.label == "3h") {
      EXPECT_FALSE(a.entry);
      EXPECT_FALSE(a.error.empty());
    } else {
      EXPECT_TRUE(a.entry) << a.label << ": " << a.error;
    }
  }
  const auto some = build_catalog(tetra(), kQuad, {"3c"});
  ASSERT_EQ(some.size(), 1u);
  const auto bad = build_catalog(tetra(), kQuad, {"9z"});
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_FALSE(bad[0].entry);
  EXPECT_NE(bad[0].error.find("unknown"), std::string::npos);
}

TEST(CatalogProperty, RationalFamilyEntriesAreUnstable) {
  const auto rat = PotentialFamily::rational();
  for (const auto& g : {triangle(), tetra()}) {
    for (const auto& a : build_catalog(g, rat)) {
      if (!a.entry) continue;
      EXPECT_LT(a.entry->residual, 1e-9) << a.label;
      const auto r = analyze(a.entry->p, g, rat);
      EXPECT_TRUE(r.witness) << a.label;
    }
  }
}
