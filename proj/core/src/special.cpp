#include "itecp/special.hpp"

#include <cmath>
#include <stdexcept>

namespace itecp {

double regularized_incomplete_beta(double x, int a, int b) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("regularized_incomplete_beta: x outside [0,1]");
    if (a < 1 || b < 1)
        throw std::domain_error("regularized_incomplete_beta: shapes must be >= 1");

    const int n = a + b - 1;
    // Terms accumulated from j = n down to a; C(n, j) tracked incrementally.
    // j = n term is x^n, so the loop seeds there and walks down.
    double coeff = 1.0;  // C(n, n)
    double sum = 0.0;
    for (int j = n; j >= a; --j) {
        sum += coeff * std::pow(x, j) * std::pow(1.0 - x, n - j);
        // C(n, j-1) = C(n, j) * j / (n - j + 1)
        coeff *= static_cast<double>(j) / static_cast<double>(n - j + 1);
    }
    if (sum < 0.0) return 0.0;
    if (sum > 1.0) return 1.0;
    return sum;
}

}  // namespace itecp
