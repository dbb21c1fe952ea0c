#include <doctest.h>

#include <cmath>
#include <random>

#include "minidarts/numeric.hpp"
#include "minidarts/search_space.hpp"

using namespace minidarts;

namespace {

SupernetSpec small_spec(std::size_t cells = 1, std::size_t dim = 8) {
    SupernetSpec spec;
    spec.cells = cells;
    spec.feature_dim = dim;
    spec.input_dim = dim;
    spec.classes = 3;
    return spec;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

// Straight-line per-op oracle: evaluates each candidate op by hand on a
// plain vector and mixes with an independently computed softmax.
std::vector<double> mixed_edge_oracle(const SupernetSpec& spec,
                                      std::vector<std::vector<Tensor>>& op_params,
                                      const std::vector<double>& alpha,
                                      const std::vector<double>& x) {
    auto w = softmax(alpha);
    std::size_t d = x.size();
    std::vector<double> out(d, 0.0);
    for (std::size_t m = 0; m < spec.op_set.count(); ++m) {
        std::vector<double> o;
        switch (spec.op_set.ops[m].kind) {
            case OpKind::zeroize:
                o.assign(d, 0.0);
                break;
            case OpKind::identity:
                o = x;
                break;
            case OpKind::affine_relu: {
                o.assign(d, 0.0);
                const Tensor& W = op_params[m][0];
                const Tensor& b = op_params[m][1];
                for (std::size_t i = 0; i < d; ++i) {
                    double acc = b.data[i];
                    for (std::size_t j = 0; j < d; ++j)
                        acc += W.data[i * d + j] * x[j];
                    o[i] = std::max(acc, 0.0);
                }
                break;
            }
            case OpKind::double_affine_relu: {
                std::vector<double> h(d, 0.0);
                const Tensor& W1 = op_params[m][0];
                const Tensor& b1 = op_params[m][1];
                for (std::size_t i = 0; i < d; ++i) {
                    double acc = b1.data[i];
                    for (std::size_t j = 0; j < d; ++j)
                        acc += W1.data[i * d + j] * x[j];
                    h[i] = std::max(acc, 0.0);
                }
                o.assign(d, 0.0);
                const Tensor& W2 = op_params[m][2];
                const Tensor& b2 = op_params[m][3];
                for (std::size_t i = 0; i < d; ++i) {
                    double acc = b2.data[i];
                    for (std::size_t j = 0; j < d; ++j)
                        acc += W2.data[i * d + j] * h[j];
                    o[i] = std::max(acc, 0.0);
                }
                break;
            }
            case OpKind::window_mean: {
                o.assign(d, 0.0);
                for (std::size_t j = 0; j < d; ++j) {
                    std::size_t lo = j >= 1 ? j - 1 : 0;
                    std::size_t hi = std::min(d - 1, j + 1);
                    double acc = 0.0;
                    for (std::size_t k = lo; k <= hi; ++k) acc += x[k];
                    o[j] = acc / static_cast<double>(hi - lo + 1);
                }
                break;
            }
        }
        for (std::size_t i = 0; i < d; ++i) out[i] += w[m] * o[i];
    }
    return out;
}

}  // namespace

TEST_CASE("default operation set mirrors the 5-op menu") {
    auto ops = OperationSet::default_set();
    REQUIRE(ops.count() == 5);
    CHECK(ops.ops[0].name == "none");
    CHECK(ops.ops[1].name == "skip_connect");
    CHECK(ops.ops[2].name == "op_small");
    CHECK(ops.ops[3].name == "op_large");
    CHECK(ops.ops[4].name == "avg_smooth");
    CHECK(ops.ops[2].learnable());
    CHECK(ops.ops[3].learnable());
    CHECK_FALSE(ops.ops[1].learnable());
}

TEST_CASE("default cell topology has 4 nodes and 6 edges") {
    SupernetSpec spec;
    CHECK(spec.num_edges() == 6);
    auto edges = spec.edges();
    REQUIRE(edges.size() == 6);
    CHECK(edges[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(edges.back() == std::pair<std::size_t, std::size_t>{2, 3});
}

TEST_CASE("remove_operation") {
    auto ops = OperationSet::default_set();
    auto reduced = ops.without("skip_connect");
    REQUIRE(reduced.count() == 4);
    CHECK_FALSE(reduced.has("skip_connect"));
    CHECK(reduced.ops[0].name == "none");  // order preserved
    CHECK(reduced.ops[1].name == "op_small");

    auto no_none = ops.without("none");
    CHECK(no_none.count() == 4);
    CHECK_FALSE(no_none.has("none"));

    CHECK_THROWS_AS(ops.without("conv7x7"), std::domain_error);
    OperationSet single{{{"none", OpKind::zeroize}}};
    CHECK_THROWS_AS(single.without("none"), std::domain_error);
}

TEST_CASE("discretize picks per-edge argmax with lowest-index ties") {
    ArchParams p = ArchParams::zeros(2, 5);
    p.alpha[0].data = {2.0, 1.0, 0.0, -1.0, -2.0};
    // alpha[1] stays all zeros: tie resolved to index 0
    Architecture arch = discretize(p);
    CHECK(arch.choice == std::vector<std::size_t>{0, 0});

    p.alpha[1].data = {0.0, 0.0, 3.0, 3.0, 0.0};
    CHECK(discretize(p).choice[1] == 2);  // first of the tied maxima
}

TEST_CASE("discretize is invariant under per-edge constant shifts") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        ArchParams p = ArchParams::zeros(6, 5);
        for (auto& a : p.alpha) a.data = random_vec(5, rng, 2.0);
        Architecture base = discretize(p);
        std::uniform_real_distribution<double> shift(-10.0, 10.0);
        std::size_t edge = rng() % 6;
        double c = shift(rng);
        for (double& v : p.alpha[edge].data) v += c;
        CHECK(discretize(p) == base);
    }
}

TEST_CASE("mixed edge: uniform alpha over identity+zeroize halves the input") {
    SupernetSpec spec = small_spec();
    spec.op_set = OperationSet{{{"skip_connect", OpKind::identity},
                                {"none", OpKind::zeroize}}};
    Tensor alpha = Tensor::zeros({2}, true);
    std::vector<std::vector<Tensor>> params(2);
    std::vector<double> x = {1.0, -2.0, 3.0, 0.5, 0.0, 1.0, 2.0, -1.0};
    Tape tape;
    Tape::NodeId xn = tape.constant({8}, std::vector<double>(x));
    Tape::NodeId out = mixed_edge_forward(tape, spec.op_set, params, alpha, xn);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(tape.value(out).data[i] == doctest::Approx(0.5 * x[i]).epsilon(1e-14));
}

TEST_CASE("mixed edge: saturated softmax selects skip_connect") {
    SupernetSpec spec = small_spec();
    Tensor alpha({5}, {-20.0, 20.0, -20.0, -20.0, -20.0}, true);
    std::mt19937_64 rng(3);
    std::vector<std::vector<Tensor>> params;
    for (const auto& op : spec.op_set.ops) {
        std::vector<Tensor> p;
        if (op.kind == OpKind::affine_relu) {
            p.push_back(Tensor({8, 8}, random_vec(64, rng), true));
            p.push_back(Tensor({8}, random_vec(8, rng), true));
        } else if (op.kind == OpKind::double_affine_relu) {
            for (int k = 0; k < 2; ++k) {
                p.push_back(Tensor({8, 8}, random_vec(64, rng), true));
                p.push_back(Tensor({8}, random_vec(8, rng), true));
            }
        }
        params.push_back(std::move(p));
    }
    std::vector<double> x = random_vec(8, rng);
    Tape tape;
    Tape::NodeId out = mixed_edge_forward(tape, spec.op_set, params, alpha,
                                          tape.constant({8}, std::vector<double>(x)));
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(tape.value(out).data[i] - x[i]) <= 1e-8);
}

TEST_CASE("mixed edge matches the per-op brute-force oracle") {
    std::mt19937_64 rng(17);
    SupernetSpec spec = small_spec();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<Tensor>> params;
        for (const auto& op : spec.op_set.ops) {
            std::vector<Tensor> p;
            std::size_t affines =
                op.kind == OpKind::affine_relu ? 1 : op.kind == OpKind::double_affine_relu ? 2 : 0;
            for (std::size_t k = 0; k < affines; ++k) {
                p.push_back(Tensor({8, 8}, random_vec(64, rng), true));
                p.push_back(Tensor({8}, random_vec(8, rng), true));
            }
            params.push_back(std::move(p));
        }
        Tensor alpha({5}, random_vec(5, rng), true);
        std::vector<double> x = random_vec(8, rng);

        Tape tape;
        Tape::NodeId out = mixed_edge_forward(
            tape, spec.op_set, params, alpha, tape.constant({8}, std::vector<double>(x)));
        auto expected = mixed_edge_oracle(spec, params, alpha.data, x);
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(tape.value(out).data[i] ==
                  doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("mixed edge output is linear in the per-op outputs") {
    // doubling the input doubles the output for ops that are positively
    // homogeneous (all of the default menu on a fixed active relu pattern);
    // verified directly on identity+zeroize+smoothing which are exactly linear
    SupernetSpec spec = small_spec();
    spec.op_set = OperationSet{{{"skip_connect", OpKind::identity},
                                {"none", OpKind::zeroize},
                                {"avg_smooth", OpKind::window_mean}}};
    std::mt19937_64 rng(29);
    Tensor alpha({3}, random_vec(3, rng), true);
    std::vector<std::vector<Tensor>> params(3);
    std::vector<double> x = random_vec(8, rng);
    std::vector<double> x2 = x;
    for (double& v : x2) v *= 2.0;
    Tape tape;
    Tape::NodeId o1 = mixed_edge_forward(tape, spec.op_set, params, alpha,
                                         tape.constant({8}, std::vector<double>(x)));
    Tape::NodeId o2 = mixed_edge_forward(tape, spec.op_set, params, alpha,
                                         tape.constant({8}, std::vector<double>(x2)));
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(tape.value(o2).data[i] ==
              doctest::Approx(2.0 * tape.value(o1).data[i]).epsilon(1e-12));
}

TEST_CASE("mixture weights sum to one") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        auto w = softmax(random_vec(5, rng, 4.0));
        double sum = 0.0;
        for (double v : w) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("supernet with zero weights yields zero logits and ln(classes) loss") {
    SupernetSpec spec = small_spec();
    SupernetWeights w = SupernetWeights::init(spec, 0);
    w.for_each([](Tensor& t) { t.data.assign(t.data.size(), 0.0); });
    ArchParams arch = ArchParams::zeros(spec.num_edges(), spec.op_set.count());
    Tape tape;
    std::vector<double> batch(2 * spec.input_dim, 0.7);
    Tape::NodeId logits = supernet_forward(tape, spec, w, arch,
                                           tape.constant({2, spec.input_dim}, batch));
    for (double v : tape.value(logits).data) CHECK(v == 0.0);
    std::vector<int> labels = {0, 1};
    double loss = tape.value(tape.cross_entropy_softmax(logits, labels)).data[0];
    CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("single-edge skip-only supernet is classifier(stem(x))") {
    SupernetSpec spec;
    spec.nodes_per_cell = 2;
    spec.cells = 1;
    spec.feature_dim = 4;
    spec.input_dim = 4;
    spec.classes = 2;
    spec.op_set = OperationSet{{{"skip_connect", OpKind::identity}}};
    SupernetWeights w = SupernetWeights::init(spec, 42);
    ArchParams arch = ArchParams::zeros(1, 1);
    std::mt19937_64 rng(1);
    std::vector<double> x = random_vec(4, rng);

    Tape tape;
    Tape::NodeId logits =
        supernet_forward(tape, spec, w, arch, tape.constant({1, 4}, std::vector<double>(x)));
    // by hand: classifier(stem(x))
    std::vector<double> h(4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        h[i] = w.stem_b.data[i];
        for (std::size_t j = 0; j < 4; ++j) h[i] += w.stem_w.data[i * 4 + j] * x[j];
    }
    for (std::size_t c = 0; c < 2; ++c) {
        double expect = w.classifier_b.data[c];
        for (std::size_t j = 0; j < 4; ++j)
            expect += w.classifier_w.data[c * 4 + j] * h[j];
        CHECK(tape.value(logits).data[c] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("supernet forward matches a straight-line reimplementation") {
    // 1 cell, 3 nodes (3 edges), full default op set, single sample
    SupernetSpec spec = small_spec();
    spec.nodes_per_cell = 3;
    std::mt19937_64 rng(99);
    SupernetWeights w = SupernetWeights::init(spec, 7);
    ArchParams arch = ArchParams::zeros(spec.num_edges(), spec.op_set.count());
    for (auto& a : arch.alpha) a.data = random_vec(5, rng);
    std::vector<double> x = random_vec(8, rng);

    Tape tape;
    Tape::NodeId logits =
        supernet_forward(tape, spec, w, arch, tape.constant({1, 8}, std::vector<double>(x)));

    // straight-line oracle for the same graph
    std::vector<double> stem(8, 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
        stem[i] = w.stem_b.data[i];
        for (std::size_t j = 0; j < 8; ++j) stem[i] += w.stem_w.data[i * 8 + j] * x[j];
    }
    // edges in spec order: (0,1), (0,2), (1,2)
    auto e01 = mixed_edge_oracle(spec, w.cell_edge_op[0][0], arch.alpha[0].data, stem);
    auto node1 = e01;
    auto e02 = mixed_edge_oracle(spec, w.cell_edge_op[0][1], arch.alpha[1].data, stem);
    auto e12 = mixed_edge_oracle(spec, w.cell_edge_op[0][2], arch.alpha[2].data, node1);
    std::vector<double> node2(8);
    for (std::size_t i = 0; i < 8; ++i) node2[i] = e02[i] + e12[i];
    for (std::size_t c = 0; c < 3; ++c) {
        double expect = w.classifier_b.data[c];
        for (std::size_t j = 0; j < 8; ++j)
            expect += w.classifier_w.data[c * 8 + j] * node2[j];
        CHECK(tape.value(logits).data[c] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("supernet spec mismatch raises a domain error") {
    SupernetSpec spec = small_spec();
    SupernetWeights w = SupernetWeights::init(spec, 0);
    ArchParams wrong = ArchParams::zeros(3, 5);  // spec has 6 edges
    Tape tape;
    CHECK_THROWS_AS(
        supernet_forward(tape, spec, w, wrong,
                         tape.constant({1, 8}, std::vector<double>(8, 0.0))),
        std::invalid_argument);
}

TEST_CASE("genotype JSON round trip") {
    SupernetSpec spec = small_spec();
    ArchParams p = ArchParams::zeros(6, 5);
    std::mt19937_64 rng(8);
    for (auto& a : p.alpha) a.data = random_vec(5, rng);
    Architecture arch = discretize(p);
    std::string json = genotype_json(arch, spec);
    CHECK(architecture_from_genotype_json(json, spec) == arch);
    CHECK(json.find("edge") != std::string::npos);
}
