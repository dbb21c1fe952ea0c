#include "minidarts/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "minidarts/numeric.hpp"

namespace minidarts {

Tape::Node& Tape::node(NodeId id) {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw std::invalid_argument("tape: invalid node id");
    return nodes_[static_cast<std::size_t>(id)];
}

const Tape::Node& Tape::node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw std::invalid_argument("tape: invalid node id");
    return nodes_[static_cast<std::size_t>(id)];
}

Tape::NodeId Tape::push(Tensor value, std::function<void(Tape&)> backprop, Tensor* leaf) {
    Node n;
    n.value = std::move(value);
    n.grad.assign(n.value.size(), 0.0);
    n.backprop = std::move(backprop);
    n.leaf = leaf;
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

std::vector<double>& Tape::grad_buf(NodeId id) { return node(id).grad; }

std::size_t Tape::rows_of(const Tensor& t) {
    return t.shape.size() >= 2 ? t.shape[0] : 1;
}

std::size_t Tape::cols_of(const Tensor& t) {
    return t.shape.empty() ? 0 : t.shape.back();
}

Tape::NodeId Tape::leaf(Tensor& t) {
    Tensor copy(t.shape, t.data);
    return push(std::move(copy), {}, &t);
}

Tape::NodeId Tape::constant(std::vector<std::size_t> shape, std::vector<double> data) {
    return push(Tensor(std::move(shape), std::move(data)), {});
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (ta.shape != tb.shape)
        throw std::invalid_argument("add: shape mismatch");
    Tensor out(ta.shape, ta.data);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += tb.data[i];
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, a, b](Tape& t) {
        const auto& g = t.grad_buf(id);
        auto& ga = t.grad_buf(a);
        auto& gb = t.grad_buf(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    };
    return id;
}

Tape::NodeId Tape::scale(NodeId a, double c) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape, ta.data);
    for (double& v : out.data) v *= c;
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, a, c](Tape& t) {
        const auto& g = t.grad_buf(id);
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    };
    return id;
}

Tape::NodeId Tape::relu(NodeId a) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape, ta.data);
    for (double v : ta.data) min_relu_margin_ = std::min(min_relu_margin_, std::abs(v));
    for (double& v : out.data) v = std::max(v, 0.0);
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, a](Tape& t) {
        const auto& g = t.grad_buf(id);
        const auto& in = t.value(a).data;
        auto& ga = t.grad_buf(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (in[i] > 0.0) ga[i] += g[i];
    };
    return id;
}

Tape::NodeId Tape::affine(NodeId weight, NodeId bias, NodeId x) {
    const Tensor& w = node(weight).value;
    const Tensor& b = node(bias).value;
    const Tensor& in = node(x).value;
    if (w.shape.size() != 2)
        throw std::invalid_argument("affine: weight must be 2-D");
    std::size_t m = w.shape[0], n = w.shape[1];
    if (b.size() != m || cols_of(in) != n)
        throw std::invalid_argument("affine: dimension mismatch");
    std::size_t batch = rows_of(in);

    std::vector<std::size_t> out_shape =
        in.shape.size() >= 2 ? std::vector<std::size_t>{batch, m}
                             : std::vector<std::size_t>{m};
    Tensor out = Tensor::zeros(out_shape);
    for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t i = 0; i < m; ++i) {
            double acc = b.data[i];
            const double* row = in.data.data() + r * n;
            const double* wrow = w.data.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * row[j];
            out.data[r * m + i] = acc;
        }
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, weight, bias, x, m, n, batch](Tape& t) {
        const auto& g = t.grad_buf(id);
        const auto& w = t.value(weight).data;
        const auto& in = t.value(x).data;
        auto& gw = t.grad_buf(weight);
        auto& gb = t.grad_buf(bias);
        auto& gx = t.grad_buf(x);
        for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t i = 0; i < m; ++i) {
                double go = g[r * m + i];
                if (go == 0.0) continue;
                gb[i] += go;
                for (std::size_t j = 0; j < n; ++j) {
                    gw[i * n + j] += go * in[r * n + j];
                    gx[r * n + j] += go * w[i * n + j];
                }
            }
    };
    return id;
}

Tape::NodeId Tape::mean_window(NodeId a, std::size_t window) {
    if (window == 0) throw std::invalid_argument("mean_window: window must be positive");
    const Tensor& ta = node(a).value;
    std::size_t batch = rows_of(ta), d = cols_of(ta);
    std::size_t half = window / 2;
    Tensor out = Tensor::zeros(ta.shape);
    for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t lo = j >= half ? j - half : 0;
            std::size_t hi = std::min(d - 1, j + half);
            double acc = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) acc += ta.data[r * d + k];
            out.data[r * d + j] = acc / static_cast<double>(hi - lo + 1);
        }
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, a, batch, d, half](Tape& t) {
        const auto& g = t.grad_buf(id);
        auto& ga = t.grad_buf(a);
        for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t j = 0; j < d; ++j) {
                std::size_t lo = j >= half ? j - half : 0;
                std::size_t hi = std::min(d - 1, j + half);
                double share = g[r * d + j] / static_cast<double>(hi - lo + 1);
                for (std::size_t k = lo; k <= hi; ++k) ga[r * d + k] += share;
            }
    };
    return id;
}

Tape::NodeId Tape::softmax_vec(NodeId a) {
    const Tensor& ta = node(a).value;
    if (ta.shape.size() != 1)
        throw std::invalid_argument("softmax_vec: expects a 1-D tensor");
    Tensor out(ta.shape, softmax(ta.data));
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, a](Tape& t) {
        const auto& g = t.grad_buf(id);
        const auto& y = t.value(id).data;
        auto& ga = t.grad_buf(a);
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - dot);
    };
    return id;
}

Tape::NodeId Tape::scale_by_entry(NodeId weights, std::size_t index, NodeId x) {
    const Tensor& w = node(weights).value;
    if (index >= w.size())
        throw std::invalid_argument("scale_by_entry: index out of range");
    double c = w.data[index];
    const Tensor& in = node(x).value;
    Tensor out(in.shape, in.data);
    for (double& v : out.data) v *= c;
    NodeId id = push(std::move(out), {});
    node(id).backprop = [id, weights, index, x, c](Tape& t) {
        const auto& g = t.grad_buf(id);
        const auto& in = t.value(x).data;
        auto& gw = t.grad_buf(weights);
        auto& gx = t.grad_buf(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            acc += g[i] * in[i];
            gx[i] += c * g[i];
        }
        gw[index] += acc;
    };
    return id;
}

Tape::NodeId Tape::zeros_like(NodeId a) {
    return push(Tensor::zeros(node(a).value.shape), {});
}

Tape::NodeId Tape::sum(NodeId a) {
    const Tensor& ta = node(a).value;
    double acc = 0.0;
    for (double v : ta.data) acc += v;
    NodeId id = push(Tensor({1}, {acc}), {});
    node(id).backprop = [id, a](Tape& t) {
        double g = t.grad_buf(id)[0];
        auto& ga = t.grad_buf(a);
        for (double& v : ga) v += g;
    };
    return id;
}

Tape::NodeId Tape::cross_entropy_softmax(NodeId logits, std::span<const int> labels) {
    const Tensor& lg = node(logits).value;
    std::size_t batch = rows_of(lg), classes = cols_of(lg);
    if (labels.size() != batch)
        throw std::invalid_argument("cross_entropy_softmax: label count mismatch");
    // Save per-row softmax for the backward rule.
    auto probs = std::make_shared<std::vector<double>>(batch * classes);
    double loss = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
        int label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= classes)
            throw std::invalid_argument("cross_entropy_softmax: label out of range");
        const double* row = lg.data.data() + r * classes;
        double mx = *std::max_element(row, row + classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            double e = std::exp(row[c] - mx);
            (*probs)[r * classes + c] = e;
            sum += e;
        }
        for (std::size_t c = 0; c < classes; ++c) (*probs)[r * classes + c] /= sum;
        loss -= std::log((*probs)[r * classes + static_cast<std::size_t>(label)]);
    }
    loss /= static_cast<double>(batch);
    NodeId id = push(Tensor({1}, {loss}), {});
    std::vector<int> owned(labels.begin(), labels.end());
    node(id).backprop = [id, logits, probs, owned = std::move(owned), batch,
                         classes](Tape& t) {
        double g = t.grad_buf(id)[0];
        auto& gl = t.grad_buf(logits);
        double inv = g / static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t c = 0; c < classes; ++c) {
                double p = (*probs)[r * classes + c];
                double target = (static_cast<std::size_t>(owned[r]) == c) ? 1.0 : 0.0;
                gl[r * classes + c] += inv * (p - target);
            }
    };
    return id;
}

void Tape::backward(NodeId loss) {
    if (nodes_.empty())
        throw std::logic_error("backward: no forward pass recorded");
    Node& loss_node = node(loss);
    if (loss_node.value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar");
    loss_node.grad[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backprop) n.backprop(*this);
        if (n.leaf && n.leaf->requires_grad) n.leaf->accumulate_grad(n.grad);
    }
}

}  // namespace minidarts
