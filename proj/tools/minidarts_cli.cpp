// Command-line driver for desk-scale differentiable architecture search:
// search runs, post-hoc derivation, the softmax-dynamics study and the
// gradient checker.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "minidarts/csv.hpp"
#include "minidarts/dynamics.hpp"
#include "minidarts/harness.hpp"

using namespace minidarts;

namespace {

// exit codes per subcommand contract
constexpr int kExitBadConfig = 2;
constexpr int kExitNonFinite = 3;
constexpr int kExitMissingCheckpoint = 4;
constexpr int kExitGradcheckFailed = 5;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) items.push_back(item);
    return items;
}

int cmd_search(const std::string& config_path, const std::string& preset,
               long long seed, const std::string& seeds) {
    RunConfig base;
    try {
        base = load_run_config(config_path);
        if (!preset.empty()) {
            TrainConfig scheme = apply_scheme(preset);
            // preset supplies the hyperparameters; run-level knobs stay
            scheme.seed = base.train.seed;
            scheme.batch_size = base.train.batch_size;
            base.train = scheme;
        }
        if (seed >= 0) base.train.seed = static_cast<std::uint64_t>(seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    }

    std::vector<std::uint64_t> seed_list;
    if (seeds.empty()) {
        seed_list.push_back(base.train.seed);
    } else {
        for (const std::string& s : split_list(seeds))
            seed_list.push_back(std::stoull(s));
    }

    std::vector<double> final_val_accs;
    for (std::uint64_t s : seed_list) {
        RunConfig cfg = base;
        cfg.train.seed = s;
        if (seed_list.size() > 1)
            cfg.out_dir = base.out_dir / ("seed_" + std::to_string(s));
        try {
            RunResult result = run_search(cfg);
            const EpochMetrics& last = result.metrics.back();
            final_val_accs.push_back(last.val_acc);
            std::cout << "seed " << s << ": " << result.metrics.size()
                      << " epochs, final train_acc=" << format_double(last.train_acc)
                      << " val_acc=" << format_double(last.val_acc) << " -> "
                      << result.out_dir.string() << "\n";
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitBadConfig;
        } catch (const TrainingDiverged& e) {
            std::cerr << "non-finite loss at epoch " << e.epoch << ": " << e.what()
                      << "\n";
            return kExitNonFinite;
        }
    }
    if (seed_list.size() > 1) {
        double mean = 0.0;
        for (double a : final_val_accs) mean += a;
        mean /= static_cast<double>(final_val_accs.size());
        double var = 0.0;
        for (double a : final_val_accs) var += (a - mean) * (a - mean);
        var /= static_cast<double>(final_val_accs.size());
        std::cout << "final val_acc over " << seed_list.size()
                  << " seeds: " << format_double(mean) << " +- "
                  << format_double(std::sqrt(var)) << "\n";
    }
    return 0;
}

int cmd_derive(const std::string& run_dir, const std::string& criteria_text) {
    std::vector<StopCriterion> criteria;
    try {
        for (const std::string& c : split_list(criteria_text))
            criteria.push_back(parse_criterion(c));
    } catch (const std::exception& e) {
        std::cerr << "criteria error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    try {
        auto entries = run_derive(run_dir, criteria);
        std::cout << "criterion,epoch,genotype_file\n";
        for (const auto& e : entries)
            std::cout << e.label << ',' << e.epoch << ",genotype_" << e.label
                      << ".json\n";
        return 0;
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kExitMissingCheckpoint;
    } catch (const std::exception& e) {
        std::cerr << "derive error: " << e.what() << "\n";
        return kExitBadConfig;
    }
}

int cmd_dynamics(const std::string& lr_list, bool sweep,
                 const std::string& dump_path, const std::string& report_path) {
    std::vector<double> lrs = {0.001, 0.01};  // the two reference rates
    if (!lr_list.empty()) {
        lrs.clear();
        for (const std::string& s : split_list(lr_list)) lrs.push_back(std::stod(s));
    }
    const ConventionCombo& combo = frozen_convention();
    std::cout << "convention: " << to_string(combo.sign) << " / "
              << to_string(combo.variant) << " / " << to_string(combo.rule) << "\n";
    std::cout << "lr,t2\n";
    for (double lr : lrs) {
        DynamicsConfig cfg;
        cfg.lr = lr;
        cfg.sign = combo.sign;
        cfg.variant = combo.variant;
        cfg.rule = combo.rule;
        try {
            Trajectory traj = run_two_phase(cfg);
            std::size_t t2 = restoration_epoch(traj, combo.rule);
            std::cout << format_double(lr) << ',' << t2 << "\n";
            if (!dump_path.empty()) {
                std::ofstream out(dump_path);
                out << trajectory_csv(traj);
            }
        } catch (const std::runtime_error& e) {
            std::cerr << "dynamics error: " << e.what() << "\n";
            return kExitNonFinite;
        }
    }
    if (sweep) {
        SweepReport report = convention_sweep({{0.001, 34}, {0.01, 44}});
        nlohmann::json doc;
        doc["targets"] = {{{"lr", 0.001}, {"t2", 34}}, {{"lr", 0.01}, {"t2", 44}}};
        doc["outcomes"] = nlohmann::json::array();
        for (const auto& o : report.outcomes) {
            nlohmann::json measured = nlohmann::json::array();
            for (std::size_t t2 : o.measured)
                measured.push_back(t2 == static_cast<std::size_t>(-1)
                                       ? nlohmann::json(nullptr)
                                       : nlohmann::json(t2));
            doc["outcomes"].push_back({{"sign", to_string(o.combo.sign)},
                                       {"variant", to_string(o.combo.variant)},
                                       {"rule", to_string(o.combo.rule)},
                                       {"measured", measured},
                                       {"matched", o.matched}});
        }
        doc["matches"] = nlohmann::json::array();
        for (const auto& m : report.matches)
            doc["matches"].push_back({{"sign", to_string(m.sign)},
                                      {"variant", to_string(m.variant)},
                                      {"rule", to_string(m.rule)}});
        if (report.has_match()) {
            auto f = report.frozen();
            doc["frozen"] = {{"sign", to_string(f.sign)},
                             {"variant", to_string(f.variant)},
                             {"rule", to_string(f.rule)}};
            std::cout << "frozen convention: " << to_string(f.sign) << " / "
                      << to_string(f.variant) << " / " << to_string(f.rule) << "\n";
        } else {
            std::cout << "no convention combination matches both targets\n";
        }
        if (!report_path.empty()) {
            std::ofstream out(report_path);
            out << doc.dump(2) << '\n';
        } else {
            std::cout << doc.dump(2) << "\n";
        }
    }
    return 0;
}

int cmd_gradcheck(std::size_t trials, std::uint64_t seed, bool corrupt) {
    GradCheckResult result = gradcheck(trials, seed, 1e-5, corrupt);
    std::cout << "trials: " << result.trials
              << " max_rel_err: " << format_double(result.max_rel_err) << "\n";
    if (!result.pass) {
        std::cerr << "gradient check failed at " << result.worst << "\n";
        return kExitGradcheckFailed;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale differentiable architecture search engine"};
    app.require_subcommand(1);

    auto* search = app.add_subcommand("search", "Run a bilevel architecture search");
    std::string config_path, preset, seeds;
    long long seed = -1;
    search->add_option("--config", config_path, "JSON run config")->required();
    search->add_option("--preset", preset, "Experiment preset name");
    search->add_option("--seed", seed, "Override the config seed");
    search->add_option("--seeds", seeds, "Comma-separated seed list (one run each)");

    auto* derive = app.add_subcommand("derive", "Derive architectures from a run");
    std::string run_dir, criteria;
    derive->add_option("--run", run_dir, "Run output directory")->required();
    derive->add_option("--criteria", criteria,
                       "Comma-separated criteria, e.g. peak:op_large,sc:2,rt:10");

    auto* dynamics = app.add_subcommand("dynamics", "Two-phase softmax study");
    std::string lr_list, dump_path, report_path;
    bool sweep = false;
    dynamics->add_option("--lr", lr_list, "Comma-separated learning rates");
    dynamics->add_flag("--sweep-conventions", sweep, "Run the convention sweep");
    dynamics->add_option("--dump-trajectory", dump_path, "Trajectory CSV output");
    dynamics->add_option("--report", report_path, "Sweep report JSON output");

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    std::size_t trials = 100;
    std::uint64_t gc_seed = 0;
    bool corrupt = false;
    gc->add_option("--trials", trials, "Number of randomized supernets");
    gc->add_option("--seed", gc_seed, "RNG seed");
    gc->add_flag("--corrupt", corrupt, "Corrupt one gradient (negative control)")
        ->group("");  // hidden; test fixture only

    CLI11_PARSE(app, argc, argv);

    if (search->parsed()) return cmd_search(config_path, preset, seed, seeds);
    if (derive->parsed()) return cmd_derive(run_dir, criteria);
    if (dynamics->parsed()) return cmd_dynamics(lr_list, sweep, dump_path, report_path);
    if (gc->parsed()) return cmd_gradcheck(trials, gc_seed, corrupt);
    return 1;
}
