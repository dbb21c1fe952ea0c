#include "minidarts/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minidarts {

std::vector<double> softmax(const std::vector<double>& x) {
    if (x.empty()) throw std::domain_error("softmax: empty input");
    for (double v : x)
        if (!std::isfinite(v)) throw std::domain_error("softmax: non-finite input");
    double m = *std::max_element(x.begin(), x.end());
    std::vector<double> y(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - m);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

std::vector<std::vector<double>> softmax_jacobian(const std::vector<double>& y) {
    double sum = 0.0;
    for (double v : y) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error("softmax_jacobian: entries must lie in [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error("softmax_jacobian: input does not sum to 1");
    std::size_t d = y.size();
    std::vector<std::vector<double>> jac(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            jac[i][j] = (i == j) ? y[i] - y[i] * y[i] : -y[i] * y[j];
    return jac;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double eps) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double orig = x[i];
        x[i] = orig + eps;
        double hi = f(x);
        x[i] = orig - eps;
        double lo = f(x);
        x[i] = orig;
        g[i] = (hi - lo) / (2.0 * eps);
    }
    return g;
}

}  // namespace minidarts
