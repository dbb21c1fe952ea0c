#ifndef MINIDARTS_TRAINER_HPP
#define MINIDARTS_TRAINER_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "minidarts/dataset.hpp"
#include "minidarts/search_space.hpp"
#include "minidarts/tensor.hpp"

namespace minidarts {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t at_epoch, const std::string& what)
        : std::runtime_error(what), epoch(at_epoch) {}
    std::size_t epoch;
};

struct LrSchedule {
    enum class Kind { cosine, constant };
    Kind kind = Kind::constant;
    double lr_max = 0.0;
    double lr_min = 0.0;

    static LrSchedule constant(double lr) { return {Kind::constant, lr, lr}; }
    static LrSchedule cosine(double lr_max, double lr_min) {
        return {Kind::cosine, lr_max, lr_min};
    }
};

// cosine: lr_min + 0.5 (lr_max - lr_min)(1 + cos(pi t / T)). Throws
// std::domain_error when t > T.
double lr_at(const LrSchedule& schedule, std::size_t t, std::size_t total);

enum class OptKind { sgd_momentum, adaptive_moment };

struct OptimizerConfig {
    OptKind kind = OptKind::sgd_momentum;
    LrSchedule schedule;
    double momentum = 0.9;  // beta1 for adaptive_moment
    double weight_decay = 0.0;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Owns per-tensor velocity (and second-moment) buffers for a fixed group of
// parameter tensors. The sgd_momentum rule is v <- mu v + g + wd theta;
// theta <- theta - lr v.
class Optimizer {
public:
    struct State {
        std::vector<double> velocity;
        std::vector<double> second_moment;  // adaptive_moment only
    };

    Optimizer(OptimizerConfig cfg, std::vector<Tensor*> tensors);

    // Applies one update using each tensor's current grad. Throws
    // TrainingDiverged(at_epoch) on non-finite gradients.
    void step(double lr, std::size_t at_epoch = 0);

    const OptimizerConfig& config() const { return cfg_; }
    std::vector<State>& states() { return states_; }
    std::size_t& step_count() { return step_count_; }

private:
    OptimizerConfig cfg_;
    std::vector<Tensor*> tensors_;
    std::vector<State> states_;
    std::size_t step_count_ = 0;
};

struct TrainConfig {
    std::size_t total_epochs = 50;
    std::size_t warmup_epochs = 0;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    LrSchedule weight_lr = LrSchedule::cosine(0.025, 0.0);
    LrSchedule param_lr = LrSchedule::constant(0.0003);
    OptKind weight_opt_kind = OptKind::sgd_momentum;
    OptKind param_opt_kind = OptKind::sgd_momentum;
    double momentum = 0.9;
    double weight_weight_decay = 0.0005;
    double param_weight_decay = 0.001;
    std::string scheme_name = "baseline";
    bool remove_skip = false;
};

// Resolves a named experiment preset to exact hyperparameters. Known names:
// baseline, warmup_10, warmup_20, warmup_30, l2_0.005, l2_0.01, freeze100,
// lr_0.001, lr_0.002, lr_0.003, ex_darts, longrun, no_skip. Throws
// ConfigError on anything else.
TrainConfig apply_scheme(const std::string& name);

const std::vector<std::string>& scheme_names();

struct EpochMetrics {
    std::size_t epoch;  // 1-based
    double lr_w, lr_a;
    double train_loss, train_acc;
    double val_loss, val_acc;
};

// Alternating first-order DARTS training: per paired minibatch one alpha step
// on a validation batch (skipped during warmup), then one omega step on a
// training batch. Single-threaded; owns all mutable state of one run.
class BilevelTrainer {
public:
    BilevelTrainer(SupernetSpec spec, TrainConfig cfg);

    EpochMetrics run_epoch(const Dataset& train, const Dataset& val);

    std::size_t epoch() const { return epoch_; }
    const SupernetSpec& spec() const { return spec_; }
    const TrainConfig& config() const { return cfg_; }
    SupernetWeights& weights() { return weights_; }
    ArchParams& arch() { return arch_; }
    Optimizer& weight_opt() { return *weight_opt_; }
    Optimizer& param_opt() { return *param_opt_; }
    std::mt19937_64& rng() { return rng_; }
    void set_epoch(std::size_t e) { epoch_ = e; }  // checkpoint restore

private:
    SupernetSpec spec_;
    TrainConfig cfg_;
    SupernetWeights weights_;
    ArchParams arch_;
    std::unique_ptr<Optimizer> weight_opt_;
    std::unique_ptr<Optimizer> param_opt_;
    std::mt19937_64 rng_;
    std::size_t epoch_ = 0;
};

}  // namespace minidarts

#endif
