#ifndef MINIDARTS_TAPE_HPP
#define MINIDARTS_TAPE_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "minidarts/tensor.hpp"

namespace minidarts {

// Reverse-mode autodiff over a define-by-run tape. Nodes are appended in
// topological order during the forward pass; backward() walks them once in
// reverse. A tape is rebuilt per forward pass and is single-threaded;
// independent tapes share no state.
class Tape {
public:
    using NodeId = std::int32_t;

    // Registers an external parameter tensor. Gradients are accumulated into
    // t.grad during backward() when t.requires_grad is set.
    NodeId leaf(Tensor& t);

    NodeId constant(std::vector<std::size_t> shape, std::vector<double> data);

    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    NodeId relu(NodeId a);

    // x: (batch, n) or (n); weight: (m, n); bias: (m). Returns x W^T + b.
    NodeId affine(NodeId weight, NodeId bias, NodeId x);

    // Centered window mean over the last dimension, window clamped at the
    // borders. Non-learnable smoothing.
    NodeId mean_window(NodeId a, std::size_t window);

    // 1-D stabilized softmax.
    NodeId softmax_vec(NodeId a);

    // out = weights[index] * x, differentiable in both the selected weight
    // entry and x.
    NodeId scale_by_entry(NodeId weights, std::size_t index, NodeId x);

    // Zero tensor of the same shape as a; no gradient flows through it.
    NodeId zeros_like(NodeId a);

    NodeId sum(NodeId a);

    // Mean cross-entropy of softmax(logits) against integer labels.
    // logits: (batch, classes).
    NodeId cross_entropy_softmax(NodeId logits, std::span<const int> labels);

    const Tensor& value(NodeId id) const { return node(id).value; }
    const std::vector<double>& grad_of(NodeId id) const { return node(id).grad; }

    // Seeds the scalar loss with gradient 1 and propagates to every
    // requires_grad leaf. Throws std::logic_error if no forward pass has been
    // recorded and std::invalid_argument if the loss is not scalar.
    void backward(NodeId loss);

    std::size_t node_count() const { return nodes_.size(); }

    // Smallest |input| seen by any relu on this tape; +inf when no relu ran.
    // Finite-difference checks use this to reject inputs too close to a kink.
    double min_relu_input_abs() const { return min_relu_margin_; }

private:
    struct Node {
        Tensor value;
        std::vector<double> grad;
        std::function<void(Tape&)> backprop;  // pulls grad into input grads
        Tensor* leaf = nullptr;
    };

    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    NodeId push(Tensor value, std::function<void(Tape&)> backprop, Tensor* leaf = nullptr);
    std::vector<double>& grad_buf(NodeId id);
    static std::size_t rows_of(const Tensor& t);
    static std::size_t cols_of(const Tensor& t);

    std::vector<Node> nodes_;
    double min_relu_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace minidarts

#endif
