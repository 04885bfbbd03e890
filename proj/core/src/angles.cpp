#include "flexform/lemmas.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flexform {

namespace {

double length(const std::array<double, 6>& l, int a, int b) {
  // index of pair (a, b), a < b, in the order 12, 13, 14, 23, 24, 34
  static constexpr int kIndex[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return l[static_cast<std::size_t>(kIndex[a][b])];
}

double angle_deg(double adjacent1, double adjacent2, double opposite) {
  const double c = (adjacent1 * adjacent1 + adjacent2 * adjacent2 - opposite * opposite) /
                   (2.0 * adjacent1 * adjacent2);
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

}  // namespace

bool AngleReport::all_hold() const {
  return std::all_of(vertices.begin(), vertices.end(), [](const VertexAngles& v) {
    return v.sum_below_360 && v.pair_sums_exceed_third;
  });
}

double cayley_menger(const std::array<double, 6>& l) {
  Eigen::Matrix<double, 5, 5> C;
  C.setOnes();
  C(0, 0) = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double v = a == b ? 0.0 : length(l, a, b);
      C(a + 1, b + 1) = v * v;
    }
  }
  return C.determinant();
}

AngleReport verify_angle_inequalities(const std::array<double, 6>& l) {
  for (double v : l) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NonRealizableTetrahedron("tetrahedron edge lengths must be positive and finite");
    }
  }
  static constexpr int kFaces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& f : kFaces) {
    const double a = length(l, f[0], f[1]);
    const double b = length(l, f[0], f[2]);
    const double c = length(l, f[1], f[2]);
    if (!(a + b > c && a + c > b && b + c > a)) {
      throw NonRealizableTetrahedron("a face violates the strict triangle inequality");
    }
  }
  if (!(cayley_menger(l) > 0.0)) {
    throw NonRealizableTetrahedron("lengths do not bound a tetrahedron of positive volume");
  }

  AngleReport rep;
  for (int v = 0; v < 4; ++v) {
    int others[3];
    int n = 0;
    for (int a = 0; a < 4; ++a) {
      if (a != v) others[n++] = a;
    }
    auto& va = rep.vertices[static_cast<std::size_t>(v)];
    va.vertex = v;
    const auto at = [&](int a, int b) {
      return angle_deg(length(l, v, a), length(l, v, b), length(l, a, b));
    };
    va.angles = {at(others[0], others[1]), at(others[0], others[2]), at(others[1], others[2])};
    va.sum = va.angles[0] + va.angles[1] + va.angles[2];
    va.sum_below_360 = va.sum < 360.0;
    va.pair_sums_exceed_third = va.angles[0] + va.angles[1] > va.angles[2] &&
                                va.angles[0] + va.angles[2] > va.angles[1] &&
                                va.angles[1] + va.angles[2] > va.angles[0];
  }
  return rep;
}

}  // namespace flexform
