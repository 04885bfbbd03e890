#include "flexform/controller.hpp"
#include "flexform/kernels.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace flexform;

namespace {

const auto kQuad = PotentialFamily::quadratic();
FormationGraph triangle() { return FormationGraph::uniform(Topology::TriangleFlex2D, 4.0); }
FormationGraph tetra() { return FormationGraph::uniform(Topology::TetrahedronFlex3D, 4.0); }

// Desired equilateral triangle of side 4 with the flex agent straight above
// agent 3.
Eigen::VectorXd desired_triangle() {
  const double h = 2 * std::sqrt(3.0);
  Eigen::VectorXd p(8);
  p << 0, 0, 4, 0, 2, h, 2, h + 4;
  return p;
}

}  // namespace

TEST(GradientControl, ZeroAtDesiredShape) {
  const Eigen::VectorXd u = gradient_control(Realization(desired_triangle(), 2), triangle(), kQuad);
  EXPECT_LT(u.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradientControl, SingleEdgeActionReaction) {
  const double dbar = 2.0, delta = 0.3;
  const FormationGraph g(2, 2, {{0, 1, dbar}}, {0, 1});
  Eigen::VectorXd p(4);
  p << 0, 0, dbar + delta, 0;
  const Eigen::VectorXd u = gradient_control(Realization(p, 2), g, kQuad);
  const double e = (dbar + delta) * (dbar + delta) - dbar * dbar;
  EXPECT_NEAR(u[0], -e * -(dbar + delta), 1e-14);
  EXPECT_NEAR(u[1], 0.0, 1e-14);
  EXPECT_NEAR(u[2], -u[0], 1e-14);
  EXPECT_NEAR(u[3], -u[1], 1e-14);
}

TEST(GradientControl, MatchesFiniteDifferenceOfPotentialAtPlanarStart) {
  const auto g = triangle();
  const Eigen::VectorXd p = oracle::planar_start();
  const Eigen::VectorXd u = gradient_control(Realization(p, 2), g, kQuad);
  const Eigen::VectorXd fd = oracle::fd_gradient(
      [&](const Eigen::VectorXd& x) { return oracle::potential(g, kQuad, x); }, p, 1e-5 * 24);
  EXPECT_LT(oracle::rel_error(u, -fd), 1e-6);
}

TEST(GradientControlProperty, EqualsNegativeGradientForAllFamilies) {
  std::mt19937_64 rng(3);
  for (const auto& family : {PotentialFamily::quadratic(), PotentialFamily::rational(), oracle::quartic()}) {
    for (const auto& g : {triangle(), tetra()}) {
      for (int trial = 0; trial < 25; ++trial) {
        const Eigen::VectorXd p = oracle::random_positions(g.num_nodes(), g.dimension(), 6.0, rng);
        bool inside = true;
        for (const auto& s : edge_states(Realization(p, g.dimension()), g, kQuad)) {
          inside = inside && s.z.norm() > 0.5;
        }
        if (!inside) continue;
        const Eigen::VectorXd u = gradient_control(Realization(p, g.dimension()), g, family);
        const Eigen::VectorXd fd = oracle::fd_gradient(
            [&](const Eigen::VectorXd& x) { return oracle::potential(g, family, x); }, p, 1e-5 * 6);
        EXPECT_LT(oracle::rel_error(u, -fd), 1e-6) << family.name();
        EXPECT_NEAR(potential_energy(Realization(p, g.dimension()), g, family),
                    oracle::potential(g, family, p), 1e-12 * std::max(1.0, oracle::potential(g, family, p)));
      }
    }
  }
}

TEST(GradientControlProperty, TranslationInvariantRotationEquivariantZeroSum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-50, 50);
  for (const auto& g : {triangle(), tetra()}) {
    const int d = g.dimension();
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd p = oracle::random_positions(g.num_nodes(), d, 8.0, rng);
      const Eigen::VectorXd u = gradient_control(Realization(p, d), g, kQuad);
      const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());

      Eigen::VectorXd c(d);
      for (int a = 0; a < d; ++a) c[a] = shift(rng);
      Eigen::VectorXd moved = p;
      for (int i = 0; i < g.num_nodes(); ++i) moved.segment(i * d, d) += c;
      EXPECT_LT((gradient_control(Realization(moved, d), g, kQuad) - u).cwiseAbs().maxCoeff() / scale, 1e-12);

      const Eigen::MatrixXd Q = oracle::random_rotation(d, rng);
      const Eigen::VectorXd ur = gradient_control(Realization(oracle::rotate(Q, p), d), g, kQuad);
      EXPECT_LT((ur - oracle::rotate(Q, u)).cwiseAbs().maxCoeff() / scale, 1e-12);

      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < g.num_nodes(); ++i) sum += u.segment(i * d, d);
      EXPECT_LT(sum.cwiseAbs().maxCoeff() / scale, 1e-12);
    }
  }
}

TEST(GradientControlProperty, DescentDirection) {
  std::mt19937_64 rng(9);
  const auto g = tetra();
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd p = oracle::random_positions(5, 3, 6.0, rng);
    const Eigen::VectorXd u = gradient_control(Realization(p, 3), g, kQuad);
    const Eigen::VectorXd grad = oracle::fd_gradient(
        [&](const Eigen::VectorXd& x) { return oracle::potential(g, kQuad, x); }, p, 1e-5);
    EXPECT_LE(u.dot(grad), 1e-6 * grad.squaredNorm());
  }
}

namespace {

// Offsets Q(p_i - p_j) measured by agent i in frame Q, and desired lengths.
void local_measurements(const FormationGraph& g, const Eigen::VectorXd& p, int i, const Eigen::MatrixXd& Q,
                        std::vector<Eigen::VectorXd>& offsets, std::vector<double>& desired) {
  const int d = g.dimension();
  offsets.clear();
  desired.clear();
  for (int j : g.neighbors(i)) {
    offsets.push_back(Q * (p.segment(i * d, d) - p.segment(j * d, d)));
    desired.push_back(g.desired(i, j));
  }
}

}  // namespace

TEST(LocalFrame, IdentityMatchesGlobalBlock) {
  const auto g = triangle();
  const Eigen::VectorXd p = oracle::planar_start();
  const Eigen::VectorXd u = gradient_control(Realization(p, 2), g, kQuad);
  std::vector<Eigen::VectorXd> offsets;
  std::vector<double> desired;
  for (int i = 0; i < 4; ++i) {
    local_measurements(g, p, i, Eigen::Matrix2d::Identity(), offsets, desired);
    const Eigen::VectorXd ui = local_frame_control(offsets, desired, kQuad);
    EXPECT_LT((ui - u.segment(2 * i, 2)).norm(), 1e-12);
  }
}

TEST(LocalFrame, QuarterTurnRotatesOutput) {
  const auto g = triangle();
  const Eigen::VectorXd p = oracle::planar_start();
  const Eigen::VectorXd u = gradient_control(Realization(p, 2), g, kQuad);
  Eigen::Matrix2d Q;
  Q << 0, -1, 1, 0;
  std::vector<Eigen::VectorXd> offsets;
  std::vector<double> desired;
  for (int i = 0; i < 4; ++i) {
    local_measurements(g, p, i, Q, offsets, desired);
    const Eigen::VectorXd ui = local_frame_control(offsets, desired, kQuad);
    EXPECT_LT((ui - Q * u.segment(2 * i, 2)).norm(), 1e-12 * std::max(1.0, u.norm()));
  }
}

TEST(LocalFrameProperty, RandomRotationsIn3D) {
  std::mt19937_64 rng(13);
  const auto g = tetra();
  std::vector<Eigen::VectorXd> offsets;
  std::vector<double> desired;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd p = oracle::random_positions(5, 3, 8.0, rng);
    const Eigen::VectorXd u = gradient_control(Realization(p, 3), g, kQuad);
    for (int i = 0; i < 5; ++i) {
      const Eigen::MatrixXd Q = oracle::random_rotation(3, rng);
      local_measurements(g, p, i, Q, offsets, desired);
      const Eigen::VectorXd ui = local_frame_control(offsets, desired, kQuad);
      EXPECT_LT((ui - Q * u.segment(3 * i, 3)).norm() / std::max(1.0, u.norm()), 1e-12);
    }
  }
}

TEST(LocalFrame, ExplicitGValues) {
  std::vector<Eigen::VectorXd> offsets{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2)};
  std::vector<double> gs{3.0, -1.0};
  const Eigen::VectorXd u = local_frame_control(offsets, gs);
  EXPECT_LT((u - Eigen::Vector2d(-3, 2)).norm(), 1e-15);
  std::vector<double> wrong{1.0};
  EXPECT_THROW(local_frame_control(offsets, wrong), std::invalid_argument);
}

TEST(Leader, TargetTermAtPlanarStart) {
  const auto g = triangle();
  const Realization p(oracle::planar_start(), 2);
  const auto spec = LeaderSpec::target(5.0, Eigen::Vector2d(10, 10));
  const Eigen::VectorXd diff = leader_control(p, 0.0, g, kQuad, spec) - gradient_control(p, g, kQuad);
  EXPECT_NEAR(diff[6], 50.0, 1e-12);
  EXPECT_NEAR(diff[7], 3.86, 1e-12);
  EXPECT_EQ(diff.head(6).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Leader, TargetTermVanishesAtTarget) {
  const auto g = triangle();
  Eigen::VectorXd v = oracle::planar_start();
  v.tail(2) = Eigen::Vector2d(10, 10);
  const Realization p(v, 2);
  const auto spec = LeaderSpec::target(5.0, Eigen::Vector2d(10, 10));
  EXPECT_EQ((leader_control(p, 1.0, g, kQuad, spec) - gradient_control(p, g, kQuad)).norm(), 0.0);
}

TEST(Leader, WindowedZeroOutsideWindow) {
  const auto g = triangle();
  const Realization p(oracle::planar_start(), 2);
  const auto spec = LeaderSpec::windowed(1.0, 2.0, [](double t) { return Eigen::Vector2d(t, -t); });
  const Eigen::VectorXd base = gradient_control(p, g, kQuad);
  EXPECT_EQ((leader_control(p, 2.5, g, kQuad, spec) - base).norm(), 0.0);
  EXPECT_EQ((leader_control(p, 0.5, g, kQuad, spec) - base).norm(), 0.0);
  const Eigen::VectorXd inside = leader_control(p, 1.5, g, kQuad, spec) - base;
  EXPECT_LT((inside.tail(2) - Eigen::Vector2d(1.5, -1.5)).norm(), 1e-15);
}

TEST(Leader, PiecewiseSamples) {
  const auto spec = LeaderSpec::piecewise(0.0, 3.0, {0.0, 1.0, 2.0},
                                          {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(2, 2)});
  const Eigen::Vector2d flex(0, 0);
  EXPECT_EQ(spec.input(0.5, flex), Eigen::VectorXd(Eigen::Vector2d(1, 0)));
  EXPECT_EQ(spec.input(1.0, flex), Eigen::VectorXd(Eigen::Vector2d(0, 1)));
  EXPECT_EQ(spec.input(2.9, flex), Eigen::VectorXd(Eigen::Vector2d(2, 2)));
  EXPECT_EQ(spec.input(3.1, flex).norm(), 0.0);
  EXPECT_NO_THROW(spec.validate(2));
  EXPECT_THROW(spec.validate(3), LeaderSpecError);
}

TEST(LeaderProperty, InputSumEqualsLeaderVelocity) {
  std::mt19937_64 rng(17);
  const auto g = tetra();
  const Eigen::Vector3d target(10, -10, 10);
  const auto spec = LeaderSpec::target(5.0, target);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd p = oracle::random_positions(5, 3, 8.0, rng);
    const Eigen::VectorXd u = leader_control(Realization(p, 3), 0.0, g, kQuad, spec);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int i = 0; i < 5; ++i) sum += u.segment(3 * i, 3);
    const Eigen::Vector3d vf = 5.0 * (target - p.tail(3));
    EXPECT_LT((sum - vf).norm() / std::max(1.0, u.norm()), 1e-12);
  }
}

TEST(Leader, InvalidSpecs) {
  EXPECT_THROW(LeaderSpec::target(-1.0, Eigen::Vector2d(0, 0)).validate(2), LeaderSpecError);
  EXPECT_THROW(LeaderSpec::target(5.0, Eigen::Vector2d(0, 0)).validate(3), LeaderSpecError);
  EXPECT_THROW(LeaderSpec::windowed(2.0, 1.0, [](double) { return Eigen::Vector2d(0, 0); }).validate(2),
               LeaderSpecError);
  const auto blowup = LeaderSpec::windowed(0.0, 1.0, [](double t) {
    return Eigen::Vector2d(1.0 / (t - 0.5), 0.0);
  });
  EXPECT_THROW(blowup.validate(2), LeaderSpecError);
}

TEST(Leader, TargetEnergyWeights) {
  const auto g = triangle();
  const Realization p(oracle::planar_start(), 2);
  const TargetInput t{5.0, Eigen::Vector2d(10, 10)};
  const double v = potential_energy(p, g, kQuad);
  const double dist2 = 100 + 0.772 * 0.772;
  EXPECT_NEAR(target_energy(p, g, kQuad, t), v + 5.0 * dist2, 1e-9);
  EXPECT_NEAR(target_energy(p, g, kQuad, t, 0.5), v + 2.5 * dist2, 1e-9);
}
