#pragma once

#include "pnpafem/pnp.hpp"

namespace pnpafem {

/// L-shape benchmark with the smooth manufactured solution
///   p = sin(2 pi x) sin(2 pi y), n = sin(3 pi x) sin(3 pi y),
///   psi = sin(pi x) sin(pi y),
/// epsilon = 1, homogeneous Dirichlet data, exact solution attached.
ProblemSpec example1();

/// L-shape problem with f1 = f2 = f3 = 1, epsilon = 1, homogeneous Dirichlet
/// data; no exact solution (drives refinement into the reentrant corner).
ProblemSpec example2();

/// Unit-square boundary-layer benchmark, 0 < epsilon < 1:
///   p = e^(-x/sqrt(eps)) + e^(-y/sqrt(eps)),
///   n = e^(-2x/sqrt(eps)) + e^(-2y/sqrt(eps)),
///   psi = e^(-3x/sqrt(eps)) + e^(-3y/sqrt(eps)),
/// Dirichlet data equal to the exact traces, exact solution attached.
ProblemSpec example3(double epsilon);

}  // namespace pnpafem
