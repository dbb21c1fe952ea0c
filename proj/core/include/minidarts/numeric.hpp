#ifndef MINIDARTS_NUMERIC_HPP
#define MINIDARTS_NUMERIC_HPP

#include <functional>
#include <vector>

namespace minidarts {

// Numerically stabilized softmax (max-subtraction). Throws std::domain_error
// on non-finite input or empty vector.
std::vector<double> softmax(const std::vector<double>& x);

// Closed-form Jacobian of softmax evaluated at a probability vector y:
// diagonal y_i - y_i^2, off-diagonal -y_i*y_j. Returned row-major, d x d.
// Throws std::domain_error if y is not a distribution (entries in [0,1],
// sum within 1e-9 of 1).
std::vector<std::vector<double>> softmax_jacobian(const std::vector<double>& y);

// Central finite differences: (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double eps);

}  // namespace minidarts

#endif
