// Acceptance gate: one check per shipping criterion, one PASS/FAIL line each,
// nonzero exit when anything fails. Kept independent of the unit-test binary
// so it can be run standalone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "minidarts/checkpoint.hpp"
#include "minidarts/dynamics.hpp"
#include "minidarts/harness.hpp"
#include "minidarts/numeric.hpp"

using namespace minidarts;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << index << ". " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++failures;
}

void run(int index, const std::string& name,
         const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(index, name, pass, detail);
}

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("minidarts_accept_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path.string() + ">";
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Desk-scale dataset/supernet shared by the preset sweeps.
RunConfig desk_config(const std::string& preset, std::uint64_t seed) {
    RunConfig cfg;
    cfg.train = apply_scheme(preset);
    cfg.train.seed = seed;
    cfg.train.batch_size = 32;
    cfg.dataset.n = 200;
    cfg.dataset.classes = 2;
    cfg.dataset.input_dim = 8;
    cfg.dataset.seed = seed;
    cfg.nodes_per_cell = 4;
    cfg.cells = 1;
    cfg.feature_dim = 8;
    return cfg;
}

// Train without touching disk; returns the magnitude trace.
MagnitudeTrace preset_trace(RunConfig cfg) {
    SupernetSpec spec = build_spec(cfg);
    Dataset full = generate_dataset(cfg.dataset);
    auto [train, val] = split_train_val(full, cfg.dataset.seed + 1);
    BilevelTrainer trainer(spec, cfg.train);
    MagnitudeTrace trace;
    for (const auto& op : spec.op_set.ops) trace.op_names.push_back(op.name);
    for (std::size_t t = 1; t <= cfg.train.total_epochs; ++t) {
        trainer.run_epoch(train, val);
        trace.m.push_back(magnitude(trainer.arch()));
    }
    return trace;
}

}  // namespace

int main() {
    std::vector<MagnitudeTrace> real_traces;  // shared by criteria 4 and 5

    run(1, "dynamics reproduction (t2 = 34 at lr 0.001, 44 at lr 0.01)",
        [](std::string& detail) {
            auto start = clock_type::now();
            SweepReport report = convention_sweep({{0.001, 34}, {0.01, 44}});
            if (!report.has_match()) {
                detail = "no convention matches both targets";
                return false;
            }
            const ConventionCombo& combo = frozen_convention();
            std::size_t t2_slow, t2_fast;
            {
                DynamicsConfig cfg;
                cfg.lr = 0.001;
                cfg.sign = combo.sign;
                cfg.variant = combo.variant;
                t2_slow = restoration_epoch(run_two_phase(cfg), combo.rule);
                cfg.lr = 0.01;
                t2_fast = restoration_epoch(run_two_phase(cfg), combo.rule);
            }
            double elapsed = seconds_since(start);
            std::ostringstream d;
            d << "t2=" << t2_slow << "/" << t2_fast << ", " << elapsed << "s";
            detail = d.str();
            return t2_slow == 34 && t2_fast == 44 && elapsed < 1.0;
        });

    run(2, "autodiff vs central differences on 100 randomized supernets",
        [](std::string& detail) {
            auto start = clock_type::now();
            GradCheckResult result = gradcheck(100, 20260823, 1e-5);
            double elapsed = seconds_since(start);
            std::ostringstream d;
            d << "max_rel_err=" << result.max_rel_err << ", " << elapsed << "s";
            detail = d.str();
            return result.pass && elapsed < 60.0;
        });

    run(3, "softmax Jacobian closed form vs finite differences (1000 draws)",
        [](std::string& detail) {
            std::mt19937_64 rng(3);
            std::uniform_real_distribution<double> logit(-3.0, 3.0);
            double worst_fd = 0.0, worst_row = 0.0;
            for (int trial = 0; trial < 1000; ++trial) {
                std::size_t d = 2 + rng() % 7;
                std::vector<double> x(d);
                for (double& v : x) v = logit(rng);
                std::vector<double> y = softmax(x);
                auto jac = softmax_jacobian(y);
                for (std::size_t i = 0; i < d; ++i) {
                    double row_sum = 0.0;
                    for (std::size_t j = 0; j < d; ++j) row_sum += jac[i][j];
                    worst_row = std::max(worst_row, std::abs(row_sum));
                }
                for (std::size_t j = 0; j < d; ++j) {
                    auto fd = finite_diff_grad(
                        [&](const std::vector<double>& xv) { return softmax(xv)[j]; },
                        x, 1e-6);
                    for (std::size_t i = 0; i < d; ++i)
                        worst_fd = std::max(worst_fd, std::abs(jac[j][i] - fd[i]));
                }
            }
            std::ostringstream d;
            d << "max_fd_gap=" << worst_fd << ", max_row_sum=" << worst_row;
            detail = d.str();
            return worst_fd <= 1e-8 && worst_row <= 1e-12;
        });

    run(4, "magnitude normalization across every preset run",
        [&real_traces](std::string& detail) {
            double worst = 0.0;
            for (const std::string& preset : scheme_names()) {
                RunConfig cfg = desk_config(preset, 1);
                if (preset == "freeze100") {  // 20 warmup + 10 search, desk scale
                    cfg.train.warmup_epochs = 20;
                    cfg.train.total_epochs = 30;
                } else if (preset == "longrun") {
                    cfg.train.total_epochs = 100;
                }
                MagnitudeTrace trace = preset_trace(cfg);
                for (const auto& m : trace.m) {
                    double sum = 0.0;
                    for (double v : m) sum += v;
                    worst = std::max(worst, std::abs(sum - 1.0));
                }
                real_traces.push_back(std::move(trace));
            }
            std::ostringstream d;
            d << real_traces.size() << " presets, max |sum-1|=" << worst;
            detail = d.str();
            return worst <= 1e-9;
        });

    run(5, "residual-sum and peak criteria agree (1000 random + real traces)",
        [&real_traces](std::string& detail) {
            std::mt19937_64 rng(5);
            std::size_t checked = 0;
            for (int trial = 0; trial < 1000; ++trial) {
                MagnitudeTrace trace;
                std::size_t M = 2 + rng() % 5, T = 3 + rng() % 18;
                for (std::size_t o = 0; o < M; ++o)
                    trace.op_names.push_back("op" + std::to_string(o));
                std::uniform_real_distribution<double> unit(0.01, 1.0);
                for (std::size_t t = 0; t < T; ++t) {
                    std::vector<double> m(M);
                    double sum = 0.0;
                    for (double& v : m) sum += (v = unit(rng));
                    for (double& v : m) v /= sum;
                    trace.m.push_back(std::move(m));
                }
                for (std::size_t o = 0; o < M; ++o, ++checked)
                    if (criterion_residual_peak(trace, o) != criterion_peak(trace, o))
                        return false;
            }
            for (const MagnitudeTrace& trace : real_traces)
                for (std::size_t o = 0; o < trace.op_names.size(); ++o, ++checked)
                    if (criterion_residual_peak(trace, o) != criterion_peak(trace, o))
                        return false;
            detail = std::to_string(checked) + " (trace, op) pairs";
            return checked > 0;
        });

    run(6, "derive genotypes equal discretize of the rolled-back checkpoint",
        [](std::string& detail) {
            fs::path dir = fresh_dir("rollback");
            RunConfig cfg = desk_config("baseline", 6);
            cfg.train.total_epochs = 8;
            cfg.out_dir = dir;
            run_search(cfg);
            std::vector<StopCriterion> criteria = {
                parse_criterion("peak:op_large"), parse_criterion("residual:op_large"),
                parse_criterion("peak:skip_connect"), parse_criterion("sc:1"),
                parse_criterion("rt:3")};
            auto entries = run_derive(dir, criteria);
            if (entries.size() != criteria.size()) {
                detail = "entry count mismatch";
                return false;
            }
            SupernetSpec spec = build_spec(cfg);
            DirCheckpointStore store(dir);
            for (const auto& entry : entries) {
                Architecture expected = discretize(store.load_arch(entry.epoch));
                if (genotype_json(expected, spec) != entry.genotype_json) {
                    detail = "mismatch for " + entry.label;
                    return false;
                }
                if (slurp(dir / ("genotype_" + entry.label + ".json")) !=
                    entry.genotype_json + "\n") {
                    detail = "file mismatch for " + entry.label;
                    return false;
                }
            }
            detail = std::to_string(entries.size()) + " criteria";
            return true;
        });

    run(7, "warmup freezes alpha bit-exactly while omega moves from epoch 1",
        [](std::string& detail) {
            RunConfig cfg = desk_config("baseline", 7);
            cfg.train.warmup_epochs = 3;
            cfg.train.total_epochs = 6;
            SupernetSpec spec = build_spec(cfg);
            Dataset full = generate_dataset(cfg.dataset);
            auto [train, val] = split_train_val(full, cfg.dataset.seed + 1);
            BilevelTrainer trainer(spec, cfg.train);

            std::vector<std::vector<double>> alpha0;
            for (const Tensor& a : trainer.arch().alpha) alpha0.push_back(a.data);
            std::vector<double> stem0 = trainer.weights().stem_w.data;

            bool frozen_ok = true, thawed = false, omega_moved = false;
            for (std::size_t t = 1; t <= cfg.train.total_epochs; ++t) {
                trainer.run_epoch(train, val);
                bool alpha_same = true;
                for (std::size_t e = 0; e < alpha0.size(); ++e)
                    if (trainer.arch().alpha[e].data != alpha0[e]) alpha_same = false;
                if (t <= cfg.train.warmup_epochs && !alpha_same) frozen_ok = false;
                if (t > cfg.train.warmup_epochs && !alpha_same) thawed = true;
                if (t == 1 && trainer.weights().stem_w.data != stem0)
                    omega_moved = true;
            }
            if (!frozen_ok) detail = "alpha moved during warmup";
            if (!omega_moved) detail = "omega did not move in epoch 1";
            if (!thawed) detail = "alpha never moved after warmup";
            return frozen_ok && omega_moved && thawed;
        });

    run(8, "byte-identical outputs for identical config and seed",
        [](std::string& detail) {
            RunConfig cfg = desk_config("baseline", 8);
            cfg.train.total_epochs = 6;
            fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
            cfg.out_dir = a;
            run_search(cfg);
            cfg.out_dir = b;
            run_search(cfg);
            for (const char* name : {"metrics.csv", "magnitudes.csv"})
                if (slurp(a / name) != slurp(b / name)) {
                    detail = std::string(name) + " differs";
                    return false;
                }
            if (slurp(checkpoint_path(a, 6)) != slurp(checkpoint_path(b, 6))) {
                detail = "final checkpoint differs";
                return false;
            }
            detail = "metrics.csv, magnitudes.csv, epoch_6.json";
            return true;
        });

    run(9, "no_skip preset: M=4 end to end, no derived skip_connect",
        [](std::string& detail) {
            fs::path dir = fresh_dir("no_skip");
            RunConfig cfg = desk_config("no_skip", 9);
            cfg.train.total_epochs = 10;
            cfg.out_dir = dir;
            SupernetSpec spec = build_spec(cfg);
            if (spec.op_set.count() != 4 || spec.op_set.has("skip_connect")) {
                detail = "op set not reduced";
                return false;
            }
            run_search(cfg);
            auto entries = run_derive(
                dir, {parse_criterion("peak:op_large"),
                      parse_criterion("residual:op_small"), parse_criterion("rt:3")});
            for (const auto& entry : entries)
                if (entry.genotype_json.find("skip_connect") != std::string::npos) {
                    detail = "skip_connect in " + entry.label;
                    return false;
                }
            detail = std::to_string(entries.size()) + " genotypes clean";
            return true;
        });

    run(10, "desk-scale end to end: < 2 min per preset, >= 99% train accuracy",
        [](std::string& detail) {
            double slowest = 0.0;
            for (const std::string& preset : {"baseline", "ex_darts"}) {
                RunConfig cfg;
                cfg.train = apply_scheme(preset);
                cfg.train.seed = 10;
                cfg.dataset.n = 2000;
                cfg.dataset.classes = 4;
                cfg.dataset.input_dim = 16;
                cfg.dataset.seed = 10;
                cfg.feature_dim = 16;
                cfg.cells = 1;
                cfg.out_dir = fresh_dir("e2e_" + preset);
                auto start = clock_type::now();
                RunResult result = run_search(cfg);
                double elapsed = seconds_since(start);
                slowest = std::max(slowest, elapsed);
                if (result.metrics.size() != 50 || elapsed >= 120.0) {
                    detail = preset + " took " + std::to_string(elapsed) + "s";
                    return false;
                }
            }

            // well-separated blobs must be fit to >= 99% train accuracy under
            // the exchanged-schedule (constant weight lr) regime
            RunConfig cfg;
            cfg.train = apply_scheme("ex_darts");
            cfg.train.weight_lr = LrSchedule::constant(0.025);
            cfg.train.seed = 11;
            cfg.dataset.n = 400;
            cfg.dataset.classes = 2;
            cfg.dataset.input_dim = 8;
            cfg.dataset.noise = 0.05;
            cfg.dataset.seed = 11;
            cfg.feature_dim = 8;
            cfg.out_dir = fresh_dir("e2e_acc");
            RunResult result = run_search(cfg);
            double best_acc = 0.0;
            for (const EpochMetrics& m : result.metrics)
                best_acc = std::max(best_acc, m.train_acc);
            std::ostringstream d;
            d << "slowest preset " << slowest << "s, best train_acc " << best_acc;
            detail = d.str();
            return best_acc >= 0.99;
        });

    if (failures > 0) {
        std::cout << failures << " acceptance criteria failed" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
