#pragma once

namespace itecp {

// Regularized incomplete beta function I_x(a, b) for integer shape parameters
// a, b >= 1, evaluated through the binomial tail identity
//   I_x(a, b) = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}.
// Exact for integer shapes; throws std::domain_error for x outside [0, 1]
// or shapes < 1.
double regularized_incomplete_beta(double x, int a, int b);

}  // namespace itecp
