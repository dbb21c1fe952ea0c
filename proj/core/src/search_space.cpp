#include "minidarts/search_space.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace minidarts {

std::size_t OperationSet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < ops.size(); ++i)
        if (ops[i].name == name) return i;
    throw std::domain_error("unknown operation: " + name);
}

bool OperationSet::has(const std::string& name) const {
    for (const auto& op : ops)
        if (op.name == name) return true;
    return false;
}

OperationSet OperationSet::default_set() {
    return OperationSet{{
        {"none", OpKind::zeroize},
        {"skip_connect", OpKind::identity},
        {"op_small", OpKind::affine_relu},
        {"op_large", OpKind::double_affine_relu},
        {"avg_smooth", OpKind::window_mean},
    }};
}

OperationSet OperationSet::without(const std::string& name) const {
    if (!has(name)) throw std::domain_error("unknown operation: " + name);
    if (ops.size() < 2)
        throw std::domain_error("cannot remove the last operation");
    OperationSet reduced;
    for (const auto& op : ops)
        if (op.name != name) reduced.ops.push_back(op);
    return reduced;
}

std::vector<std::pair<std::size_t, std::size_t>> SupernetSpec::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> result;
    for (std::size_t to = 1; to < nodes_per_cell; ++to)
        for (std::size_t from = 0; from < to; ++from)
            result.emplace_back(from, to);
    return result;
}

ArchParams ArchParams::zeros(std::size_t num_edges, std::size_t num_ops) {
    ArchParams p;
    p.alpha.reserve(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i)
        p.alpha.push_back(Tensor::zeros({num_ops}, /*req_grad=*/true));
    return p;
}

Architecture discretize(const ArchParams& params) {
    Architecture arch;
    arch.choice.reserve(params.alpha.size());
    for (const Tensor& a : params.alpha) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < a.size(); ++i)
            if (a.data[i] > a.data[best]) best = i;
        arch.choice.push_back(best);
    }
    return arch;
}

std::string genotype_json(const Architecture& arch, const SupernetSpec& spec) {
    nlohmann::json out = nlohmann::json::array();
    auto edges = spec.edges();
    if (arch.choice.size() != edges.size())
        throw std::invalid_argument("genotype_json: edge count mismatch");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        out.push_back({{"edge", {edges[e].first, edges[e].second}},
                       {"op", spec.op_set.ops[arch.choice[e]].name}});
    }
    return out.dump(2);
}

Architecture architecture_from_genotype_json(const std::string& json_text,
                                             const SupernetSpec& spec) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    Architecture arch;
    for (const auto& entry : doc)
        arch.choice.push_back(spec.op_set.index_of(entry.at("op").get<std::string>()));
    return arch;
}

namespace {

std::vector<Tensor> op_parameter_tensors(const OpDescriptor& op, std::size_t dim,
                                         std::mt19937_64& rng) {
    auto init_affine = [&](std::size_t out_dim, std::size_t in_dim) {
        double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Tensor w = Tensor::zeros({out_dim, in_dim}, true);
        for (double& v : w.data) v = dist(rng);
        // a random bias keeps downstream relu inputs away from exact zero even
        // when a whole row of the previous relu is clamped
        Tensor b = Tensor::zeros({out_dim}, true);
        for (double& v : b.data) v = dist(rng);
        return std::pair(std::move(w), std::move(b));
    };
    std::vector<Tensor> params;
    switch (op.kind) {
        case OpKind::affine_relu: {
            auto [w, b] = init_affine(dim, dim);
            params.push_back(std::move(w));
            params.push_back(std::move(b));
            break;
        }
        case OpKind::double_affine_relu: {
            auto [w1, b1] = init_affine(dim, dim);
            auto [w2, b2] = init_affine(dim, dim);
            params.push_back(std::move(w1));
            params.push_back(std::move(b1));
            params.push_back(std::move(w2));
            params.push_back(std::move(b2));
            break;
        }
        default:
            break;  // zeroize / identity / window_mean carry no weights
    }
    return params;
}

}  // namespace

SupernetWeights SupernetWeights::init(const SupernetSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SupernetWeights w;
    auto uniform_fill = [&](Tensor& t, std::size_t fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : t.data) v = dist(rng);
    };
    w.stem_w = Tensor::zeros({spec.feature_dim, spec.input_dim}, true);
    uniform_fill(w.stem_w, spec.input_dim);
    w.stem_b = Tensor::zeros({spec.feature_dim}, true);
    uniform_fill(w.stem_b, spec.input_dim);

    w.cell_edge_op.resize(spec.cells);
    for (std::size_t c = 0; c < spec.cells; ++c) {
        w.cell_edge_op[c].resize(spec.num_edges());
        for (std::size_t e = 0; e < spec.num_edges(); ++e) {
            for (const auto& op : spec.op_set.ops)
                w.cell_edge_op[c][e].push_back(
                    op_parameter_tensors(op, spec.feature_dim, rng));
        }
    }
    w.classifier_w = Tensor::zeros({spec.classes, spec.feature_dim}, true);
    uniform_fill(w.classifier_w, spec.feature_dim);
    w.classifier_b = Tensor::zeros({spec.classes}, true);
    uniform_fill(w.classifier_b, spec.feature_dim);
    return w;
}

namespace {

Tape::NodeId apply_op(Tape& tape, const OpDescriptor& op,
                      std::vector<Tensor>& params, Tape::NodeId x,
                      std::size_t window) {
    switch (op.kind) {
        case OpKind::zeroize:
            return tape.zeros_like(x);
        case OpKind::identity:
            return x;
        case OpKind::affine_relu:
            return tape.relu(tape.affine(tape.leaf(params[0]), tape.leaf(params[1]), x));
        case OpKind::double_affine_relu: {
            Tape::NodeId h =
                tape.relu(tape.affine(tape.leaf(params[0]), tape.leaf(params[1]), x));
            return tape.relu(tape.affine(tape.leaf(params[2]), tape.leaf(params[3]), h));
        }
        case OpKind::window_mean:
            return tape.mean_window(x, window);
    }
    throw std::logic_error("apply_op: unhandled op kind");
}

}  // namespace

Tape::NodeId mixed_edge_forward(Tape& tape, const OperationSet& op_set,
                                std::vector<std::vector<Tensor>>& op_params,
                                Tensor& alpha_edge, Tape::NodeId x,
                                std::size_t smoothing_window) {
    if (alpha_edge.size() != op_set.count() || op_params.size() != op_set.count())
        throw std::invalid_argument("mixed_edge_forward: op count mismatch");
    Tape::NodeId weights = tape.softmax_vec(tape.leaf(alpha_edge));
    Tape::NodeId acc = -1;
    for (std::size_t m = 0; m < op_set.count(); ++m) {
        Tape::NodeId out = apply_op(tape, op_set.ops[m], op_params[m], x, smoothing_window);
        Tape::NodeId weighted = tape.scale_by_entry(weights, m, out);
        acc = (acc < 0) ? weighted : tape.add(acc, weighted);
    }
    return acc;
}

Tape::NodeId supernet_forward(Tape& tape, const SupernetSpec& spec,
                              SupernetWeights& weights, ArchParams& params,
                              Tape::NodeId batch) {
    if (params.num_edges() != spec.num_edges())
        throw std::invalid_argument("supernet_forward: arch params edge count mismatch");
    Tape::NodeId h =
        tape.affine(tape.leaf(weights.stem_w), tape.leaf(weights.stem_b), batch);
    auto edge_list = spec.edges();
    for (std::size_t c = 0; c < spec.cells; ++c) {
        std::vector<Tape::NodeId> node_out(spec.nodes_per_cell, -1);
        node_out[0] = h;
        for (std::size_t e = 0; e < edge_list.size(); ++e) {
            auto [from, to] = edge_list[e];
            Tape::NodeId contrib =
                mixed_edge_forward(tape, spec.op_set, weights.cell_edge_op[c][e],
                                   params.alpha[e], node_out[from],
                                   spec.smoothing_window);
            node_out[to] = (node_out[to] < 0) ? contrib : tape.add(node_out[to], contrib);
        }
        h = node_out[spec.nodes_per_cell - 1];
    }
    return tape.affine(tape.leaf(weights.classifier_w),
                       tape.leaf(weights.classifier_b), h);
}

}  // namespace minidarts
