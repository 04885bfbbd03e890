#include "flexform/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flexform {

PotentialFamily::PotentialFamily(PotentialKind kind, std::string name, Scalar phi, Scalar g,
                                 Scalar rho, bool includes_boundary)
    : kind_(kind),
      name_(std::move(name)),
      phi_(std::move(phi)),
      g_(std::move(g)),
      rho_(std::move(rho)),
      includes_boundary_(includes_boundary) {}

PotentialFamily PotentialFamily::quadratic() {
  return PotentialFamily(
      PotentialKind::Quadratic, "quadratic",
      [](double e, double) { return 0.5 * e * e; },
      [](double e, double) { return e; },
      [](double, double) { return 1.0; },
      true);
}

PotentialFamily PotentialFamily::rational() {
  // g simplifies to 1 - dbar^4 / (e + dbar^2)^2.
  return PotentialFamily(
      PotentialKind::Rational, "rational",
      [](double e, double dbar) { return e * e / (e + dbar * dbar); },
      [](double e, double dbar) {
        const double s = e + dbar * dbar;
        const double d4 = dbar * dbar * dbar * dbar;
        return 1.0 - d4 / (s * s);
      },
      [](double e, double dbar) {
        const double s = e + dbar * dbar;
        const double d4 = dbar * dbar * dbar * dbar;
        return 2.0 * d4 / (s * s * s);
      },
      false);
}

PotentialFamily PotentialFamily::custom(std::string name, Scalar phi, Scalar g, Scalar rho,
                                        bool includes_boundary) {
  if (!phi || !g || !rho) throw std::invalid_argument("custom potential needs all three evaluators");
  return PotentialFamily(PotentialKind::Custom, std::move(name), std::move(phi), std::move(g),
                         std::move(rho), includes_boundary);
}

PotentialFamily PotentialFamily::from_tag(std::string_view tag) {
  if (tag == "quadratic") return quadratic();
  if (tag == "rational") return rational();
  throw std::invalid_argument("unknown potential family '" + std::string(tag) + "'");
}

bool PotentialFamily::in_domain(double e, double dbar) const {
  const double lower = -dbar * dbar;
  if (!std::isfinite(e)) return false;
  return includes_boundary_ ? e >= lower : e > lower;
}

void PotentialFamily::check_domain(double e, double dbar) const {
  if (!in_domain(e, dbar)) {
    std::ostringstream os;
    os << name_ << " potential evaluated outside its domain: e = " << e
       << ", lower bound -dbar^2 = " << -dbar * dbar;
    throw PotentialDomainError(os.str());
  }
}

double PotentialFamily::phi(double e, double dbar) const {
  check_domain(e, dbar);
  return phi_(e, dbar);
}

double PotentialFamily::g(double e, double dbar) const {
  check_domain(e, dbar);
  return g_(e, dbar);
}

double PotentialFamily::rho(double e, double dbar) const {
  check_domain(e, dbar);
  return rho_(e, dbar);
}

std::string_view to_string(AssumptionCheck check) {
  switch (check) {
    case AssumptionCheck::Nonnegative: return "phi-nonnegative";
    case AssumptionCheck::ZeroAtOrigin: return "phi-zero-at-origin";
    case AssumptionCheck::ZeroOnlyAtOrigin: return "phi-zero-only-at-origin";
    case AssumptionCheck::GradientZeroAtOrigin: return "g-zero-at-origin";
    case AssumptionCheck::GradientMonotone: return "g-strictly-increasing";
    case AssumptionCheck::CurvaturePositive: return "rho-positive";
    case AssumptionCheck::SignAgreement: return "g-sign-matches-e";
    case AssumptionCheck::Finite: return "finite";
  }
  return "unknown";
}

std::vector<double> sample_grid(double dbar, double upper, int count, double margin) {
  const double lower = -dbar * dbar + margin;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k < count; ++k) {
    grid.push_back(lower + (upper - lower) * k / std::max(1, count - 1));
  }
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<AssumptionViolation> validate_assumption1(const PotentialFamily& family,
                                                      double dbar,
                                                      std::vector<double> grid) {
  std::vector<AssumptionViolation> out;
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double prev_g = -std::numeric_limits<double>::infinity();
  for (double e : grid) {
    if (!family.in_domain(e, dbar)) continue;
    const double phi = family.phi(e, dbar);
    const double g = family.g(e, dbar);
    const double rho = family.rho(e, dbar);
    if (!std::isfinite(phi) || !std::isfinite(g) || !std::isfinite(rho)) {
      out.push_back({AssumptionCheck::Finite, e, phi});
      continue;
    }
    if (phi < 0.0) out.push_back({AssumptionCheck::Nonnegative, e, phi});
    if (e == 0.0) {
      if (phi != 0.0) out.push_back({AssumptionCheck::ZeroAtOrigin, e, phi});
      if (g != 0.0) out.push_back({AssumptionCheck::GradientZeroAtOrigin, e, g});
    } else {
      if (phi == 0.0) out.push_back({AssumptionCheck::ZeroOnlyAtOrigin, e, phi});
      if (!(g * e > 0.0)) out.push_back({AssumptionCheck::SignAgreement, e, g});
    }
    if (!(g > prev_g)) out.push_back({AssumptionCheck::GradientMonotone, e, g});
    if (!(rho > 0.0)) out.push_back({AssumptionCheck::CurvaturePositive, e, rho});
    prev_g = g;
  }
  return out;
}

}  // namespace flexform
