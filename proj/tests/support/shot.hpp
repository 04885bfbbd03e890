#pragma once

#include "flexform/equilibria.hpp"
#include "oracle.hpp"

namespace shot {

// Start states with the flex coordinate moved onto the stable manifold of
// the saddle the literal start states pass by.
inline flexform::Realization planar(const flexform::ClosedLoop& sys) {
  flexform::Realization p(oracle::planar_start(), 2);
  p.agent(3)[1] = flexform::shoot_to_saddle(p, sys, 3, 1, 9.2, 9.25, 1.5).value;
  return p;
}

inline flexform::Realization spatial(const flexform::ClosedLoop& sys) {
  flexform::Realization p(oracle::spatial_start(), 3);
  p.agent(4)[2] = flexform::shoot_to_saddle(p, sys, 4, 2, 6.47, 6.50, 1.5).value;
  return p;
}

}  // namespace shot
