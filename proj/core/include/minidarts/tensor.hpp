#ifndef MINIDARTS_TENSOR_HPP
#define MINIDARTS_TENSOR_HPP

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace minidarts {

// Dense multi-dimensional value with an optional gradient slot.
// All scalars are 64-bit floats.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty unless requires_grad and a backward ran
    bool requires_grad = false;

    Tensor() = default;

    Tensor(std::vector<std::size_t> shp, std::vector<double> values,
           bool req_grad = false)
        : shape(std::move(shp)), data(std::move(values)), requires_grad(req_grad) {
        if (data.size() != element_count(shape))
            throw std::invalid_argument("tensor data length does not match shape");
    }

    static std::size_t element_count(const std::vector<std::size_t>& shp) {
        std::size_t n = 1;
        for (std::size_t d : shp) {
            if (d == 0) throw std::invalid_argument("tensor shape entries must be positive");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> shp, bool req_grad = false) {
        std::size_t n = element_count(shp);
        return Tensor(std::move(shp), std::vector<double>(n, 0.0), req_grad);
    }

    std::size_t size() const { return data.size(); }

    void zero_grad() {
        if (requires_grad) grad.assign(data.size(), 0.0);
    }

    void accumulate_grad(const std::vector<double>& g) {
        if (!requires_grad) return;
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
    }
};

}  // namespace minidarts

#endif
