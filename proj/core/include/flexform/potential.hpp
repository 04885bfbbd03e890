#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexform {

/// Raised when a squared-distance error lies outside a family's domain.
class PotentialDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class PotentialKind { Quadratic, Rational, Custom };

/// Edge potential phi(e, dbar) of the squared-distance error e = |z|^2 - dbar^2,
/// together with g = dphi/de and rho = dg/de.
///
/// Families are cheap value types; evaluation is pure and thread-safe.
class PotentialFamily {
 public:
  using Scalar = std::function<double(double e, double dbar)>;

  /// phi = e^2 / 2, g = e, rho = 1.
  static PotentialFamily quadratic();
  /// phi = e^2 / (e + dbar^2). Undefined when agents coincide (e = -dbar^2).
  static PotentialFamily rational();
  /// A user-supplied triple. `includes_boundary` states whether the
  /// evaluators are finite at e = -dbar^2 (coincident agents).
  static PotentialFamily custom(std::string name, Scalar phi, Scalar g, Scalar rho,
                                bool includes_boundary = false);
  /// "quadratic" or "rational"; throws std::invalid_argument otherwise.
  static PotentialFamily from_tag(std::string_view tag);

  PotentialKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool includes_boundary() const { return includes_boundary_; }

  bool in_domain(double e, double dbar) const;

  double phi(double e, double dbar) const;
  double g(double e, double dbar) const;
  double rho(double e, double dbar) const;

 private:
  PotentialFamily(PotentialKind kind, std::string name, Scalar phi, Scalar g, Scalar rho,
                  bool includes_boundary);
  void check_domain(double e, double dbar) const;

  PotentialKind kind_;
  std::string name_;
  Scalar phi_;
  Scalar g_;
  Scalar rho_;
  bool includes_boundary_;
};

enum class AssumptionCheck {
  Nonnegative,
  ZeroAtOrigin,
  ZeroOnlyAtOrigin,
  GradientZeroAtOrigin,
  GradientMonotone,
  CurvaturePositive,
  SignAgreement,
  Finite,
};

std::string_view to_string(AssumptionCheck check);

struct AssumptionViolation {
  AssumptionCheck check;
  double e = 0.0;
  double value = 0.0;
};

/// Evenly spaced errors over (-dbar^2 + margin, upper], always including 0.
std::vector<double> sample_grid(double dbar, double upper, int count, double margin = 0.1);

/// Point checks of the potential assumptions over `grid` (plus e = 0):
/// phi >= 0 with equality only at 0, g(0) = 0, g strictly increasing along
/// the sorted grid, rho > 0 and sign(g) = sign(e). Analyticity near 0 is not
/// checkable from samples and is not attempted. Empty result means pass.
std::vector<AssumptionViolation> validate_assumption1(const PotentialFamily& family,
                                                      double dbar,
                                                      std::vector<double> grid);

}  // namespace flexform
