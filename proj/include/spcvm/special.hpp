#pragma once

#include <functional>

namespace spcvm {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta function I_x(a, b).
double inc_beta(double a, double b, double x);

// Deterministic adaptive quadrature: Gauss-Legendre panels bisected until
// the two-half refinement agrees with the parent panel within tol.
double integrate_adaptive_gl(const std::function<double(double)>& f, double lo, double hi,
                             double tol);

} // namespace spcvm
