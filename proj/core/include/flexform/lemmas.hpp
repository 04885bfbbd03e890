#pragma once

#include "flexform/classify.hpp"
#include "flexform/graph.hpp"
#include "flexform/potential.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexform {

class SubformMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonRealizableTetrahedron : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SignRelation { Negative, Positive, Zero };

/// One sign claim about a sum of g values over role pairs.
struct SignClaim {
  std::string statement;  // e.g. "g_ij + g_ik < 0"
  SignRelation relation = SignRelation::Negative;
  double value = 0.0;
  /// How far the value is inside the claimed region; negative on failure.
  /// For zero claims this is band - |value|.
  double margin = 0.0;
  bool pass = false;
};

struct SignReport {
  std::string subform;
  std::vector<int> roles;
  double zero_band = 0.0;
  std::vector<SignClaim> claims;

  bool all_pass() const;
  int passed() const;
};

/// Evaluates every sign claim for the subform in `cls` with the roles it
/// carries. Zero claims use the band 1e-9 * max(1, max |g|). Throws
/// SubformMismatch when `cls` has no subform with a sign table.
SignReport verify_sign_properties(const Realization& p, const FormationGraph& graph,
                                  const PotentialFamily& family, const EquilibriumClass& cls);

/// Face angles of a tetrahedron at one vertex, in degrees.
struct VertexAngles {
  int vertex = 0;                 // zero-based
  std::array<double, 3> angles{};  // between the three edge pairs at the vertex
  double sum = 0.0;
  bool sum_below_360 = false;
  bool pair_sums_exceed_third = false;
};

struct AngleReport {
  std::array<VertexAngles, 4> vertices{};
  bool all_hold() const;
};

/// Lengths ordered (12, 13, 14, 23, 24, 34). Throws NonRealizableTetrahedron
/// when a face violates the triangle inequality or the Cayley-Menger volume
/// is not positive.
AngleReport verify_angle_inequalities(const std::array<double, 6>& lengths);

/// 288 V^2 for the six lengths, same ordering.
double cayley_menger(const std::array<double, 6>& lengths);

}  // namespace flexform
