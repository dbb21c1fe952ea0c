#ifndef MINIDARTS_SEARCH_SPACE_HPP
#define MINIDARTS_SEARCH_SPACE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "minidarts/tape.hpp"
#include "minidarts/tensor.hpp"

namespace minidarts {

enum class OpKind {
    zeroize,             // "none"
    identity,            // "skip_connect"
    affine_relu,         // one affine + ReLU, 1x1-conv analogue
    double_affine_relu,  // two affine + ReLU layers, 3x3-conv analogue
    window_mean,         // fixed window-mean smoothing, avg-pool analogue
};

struct OpDescriptor {
    std::string name;
    OpKind kind;
    bool learnable() const {
        return kind == OpKind::affine_relu || kind == OpKind::double_affine_relu;
    }
};

// Ordered candidate operation set O; M = ops.size().
struct OperationSet {
    std::vector<OpDescriptor> ops;

    std::size_t count() const { return ops.size(); }
    std::size_t index_of(const std::string& name) const;  // throws if unknown
    bool has(const std::string& name) const;

    // Five-op desk-scale set mirroring NAS-BENCH-201.
    static OperationSet default_set();

    // New set without the named op; order of the remainder preserved.
    // Throws std::domain_error on unknown name or when only one op remains.
    OperationSet without(const std::string& name) const;
};

// Cell-based supernet topology: nodes 0..nodes_per_cell-1 per cell, node 0 is
// the cell input, every (i, j) with i < j carries a compound edge, the last
// node is the cell output. Immutable after construction.
struct SupernetSpec {
    std::size_t nodes_per_cell = 4;
    std::size_t cells = 1;
    std::size_t feature_dim = 8;
    std::size_t input_dim = 8;
    std::size_t classes = 2;
    std::size_t smoothing_window = 3;
    OperationSet op_set = OperationSet::default_set();

    std::size_t num_edges() const {
        return nodes_per_cell * (nodes_per_cell - 1) / 2;
    }
    // Edges ordered (0,1), (0,2), (1,2), (0,3), ... grouped by target node.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

// Per-edge architecture parameter vectors, shared across all cells.
// Exactly N tensors of length M, each with requires_grad set.
struct ArchParams {
    std::vector<Tensor> alpha;

    static ArchParams zeros(std::size_t num_edges, std::size_t num_ops);
    std::size_t num_edges() const { return alpha.size(); }
};

// Discretized one-op-per-edge architecture.
struct Architecture {
    std::vector<std::size_t> choice;  // per-edge op index

    bool operator==(const Architecture&) const = default;
};

// Per-edge argmax over alpha; ties go to the lowest index.
Architecture discretize(const ArchParams& params);

// Genotype as a JSON string: [{"edge": [from, to], "op": name}, ...].
std::string genotype_json(const Architecture& arch, const SupernetSpec& spec);
Architecture architecture_from_genotype_json(const std::string& json_text,
                                             const SupernetSpec& spec);

// All learnable weights of the supernet in a fixed traversal order:
// stem, then [cell][edge][op] parameter tensors, then classifier.
struct SupernetWeights {
    Tensor stem_w, stem_b;
    // [cell][edge][op] -> parameter tensors (empty for non-learnable ops)
    std::vector<std::vector<std::vector<std::vector<Tensor>>>> cell_edge_op;
    Tensor classifier_w, classifier_b;

    static SupernetWeights init(const SupernetSpec& spec, std::uint64_t seed);

    template <typename Fn>
    void for_each(Fn&& fn) {
        fn(stem_w);
        fn(stem_b);
        for (auto& cell : cell_edge_op)
            for (auto& edge : cell)
                for (auto& op : edge)
                    for (auto& t : op) fn(t);
        fn(classifier_w);
        fn(classifier_b);
    }
};

// Softmax-relaxed mixed edge: sum over ops of softmax(alpha)_m * o_m(x).
// op_params holds one parameter list per op, aligned with op_set order.
Tape::NodeId mixed_edge_forward(Tape& tape, const OperationSet& op_set,
                                std::vector<std::vector<Tensor>>& op_params,
                                Tensor& alpha_edge, Tape::NodeId x,
                                std::size_t smoothing_window = 3);

// Full stem -> stacked cells -> classifier forward. Returns the logits node.
Tape::NodeId supernet_forward(Tape& tape, const SupernetSpec& spec,
                              SupernetWeights& weights, ArchParams& params,
                              Tape::NodeId batch);

}  // namespace minidarts

#endif
