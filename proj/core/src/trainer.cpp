#include "minidarts/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "minidarts/tape.hpp"

namespace minidarts {

double lr_at(const LrSchedule& schedule, std::size_t t, std::size_t total) {
    if (t > total) throw std::domain_error("lr_at: t exceeds total epochs");
    if (schedule.kind == LrSchedule::Kind::constant) return schedule.lr_max;
    double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
    return schedule.lr_min + 0.5 * (schedule.lr_max - schedule.lr_min) * (1.0 + std::cos(phase));
}

Optimizer::Optimizer(OptimizerConfig cfg, std::vector<Tensor*> tensors)
    : cfg_(cfg), tensors_(std::move(tensors)) {
    if (cfg_.momentum < 0.0 || cfg_.momentum >= 1.0)
        throw ConfigError("optimizer: momentum must lie in [0,1)");
    if (cfg_.weight_decay < 0.0)
        throw ConfigError("optimizer: weight_decay must be non-negative");
    states_.resize(tensors_.size());
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        states_[i].velocity.assign(tensors_[i]->size(), 0.0);
        if (cfg_.kind == OptKind::adaptive_moment)
            states_[i].second_moment.assign(tensors_[i]->size(), 0.0);
    }
}

void Optimizer::step(double lr, std::size_t at_epoch) {
    if (lr < 0.0) throw ConfigError("optimizer: negative learning rate");
    ++step_count_;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        Tensor& t = *tensors_[i];
        if (t.grad.size() != t.data.size()) continue;  // no gradient this step
        State& s = states_[i];
        for (std::size_t j = 0; j < t.size(); ++j) {
            double g = t.grad[j];
            if (!std::isfinite(g))
                throw TrainingDiverged(at_epoch, "non-finite gradient encountered");
            g += cfg_.weight_decay * t.data[j];
            if (cfg_.kind == OptKind::sgd_momentum) {
                s.velocity[j] = cfg_.momentum * s.velocity[j] + g;
                t.data[j] -= lr * s.velocity[j];
            } else {
                s.velocity[j] = cfg_.momentum * s.velocity[j] + (1.0 - cfg_.momentum) * g;
                s.second_moment[j] =
                    cfg_.beta2 * s.second_moment[j] + (1.0 - cfg_.beta2) * g * g;
                double m_hat = s.velocity[j] /
                               (1.0 - std::pow(cfg_.momentum,
                                               static_cast<double>(step_count_)));
                double v_hat = s.second_moment[j] /
                               (1.0 - std::pow(cfg_.beta2,
                                               static_cast<double>(step_count_)));
                t.data[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
            }
        }
    }
}

const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names = {
        "baseline", "warmup_10", "warmup_20",  "warmup_30", "l2_0.005",
        "l2_0.01",  "freeze100", "lr_0.001",   "lr_0.002",  "lr_0.003",
        "ex_darts", "longrun",   "no_skip"};
    return names;
}

TrainConfig apply_scheme(const std::string& name) {
    TrainConfig cfg;  // defaults are the baseline preset
    cfg.scheme_name = name;
    if (name == "baseline") return cfg;
    if (name == "warmup_10") { cfg.warmup_epochs = 10; return cfg; }
    if (name == "warmup_20") { cfg.warmup_epochs = 20; return cfg; }
    if (name == "warmup_30") { cfg.warmup_epochs = 30; return cfg; }
    if (name == "l2_0.005") { cfg.param_weight_decay = 0.005; return cfg; }
    if (name == "l2_0.01") { cfg.param_weight_decay = 0.01; return cfg; }
    if (name == "freeze100") {
        cfg.total_epochs = 150;
        cfg.warmup_epochs = 100;
        return cfg;
    }
    if (name == "lr_0.001") { cfg.param_lr = LrSchedule::constant(0.001); return cfg; }
    if (name == "lr_0.002") { cfg.param_lr = LrSchedule::constant(0.002); return cfg; }
    if (name == "lr_0.003") { cfg.param_lr = LrSchedule::constant(0.003); return cfg; }
    if (name == "ex_darts") {
        // Exchange the default learning-rate schemes of omega and alpha.
        cfg.weight_lr = LrSchedule::constant(0.0003);
        cfg.param_lr = LrSchedule::cosine(0.025, 0.0);
        return cfg;
    }
    if (name == "longrun") {
        cfg.weight_lr = LrSchedule::constant(0.0003);
        cfg.param_lr = LrSchedule::constant(0.001);
        cfg.total_epochs = 500;
        return cfg;
    }
    if (name == "no_skip") { cfg.remove_skip = true; return cfg; }
    throw ConfigError("unknown scheme: " + name);
}

namespace {

std::vector<Tensor*> weight_tensor_list(SupernetWeights& w) {
    std::vector<Tensor*> list;
    w.for_each([&](Tensor& t) { list.push_back(&t); });
    return list;
}

std::vector<Tensor*> param_tensor_list(ArchParams& a) {
    std::vector<Tensor*> list;
    for (Tensor& t : a.alpha) list.push_back(&t);
    return list;
}

}  // namespace

BilevelTrainer::BilevelTrainer(SupernetSpec spec, TrainConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg),
      weights_(SupernetWeights::init(spec_, cfg.seed)),
      arch_(ArchParams::zeros(spec_.num_edges(), spec_.op_set.count())),
      rng_(cfg.seed + 1) {
    if (cfg_.warmup_epochs >= cfg_.total_epochs)
        throw ConfigError("warmup_epochs must be smaller than total_epochs");
    if (cfg_.batch_size == 0) throw ConfigError("batch_size must be positive");
    weight_opt_ = std::make_unique<Optimizer>(
        OptimizerConfig{cfg_.weight_opt_kind, cfg_.weight_lr, cfg_.momentum,
                        cfg_.weight_weight_decay},
        weight_tensor_list(weights_));
    param_opt_ = std::make_unique<Optimizer>(
        OptimizerConfig{cfg_.param_opt_kind, cfg_.param_lr, cfg_.momentum,
                        cfg_.param_weight_decay},
        param_tensor_list(arch_));
}

namespace {

struct BatchStats {
    double loss = 0.0;
    double acc = 0.0;
};

BatchStats forward_batch(Tape& tape, const SupernetSpec& spec,
                         SupernetWeights& weights, ArchParams& arch,
                         const Dataset& data, std::span<const std::size_t> rows,
                         Tape::NodeId* loss_out) {
    std::vector<double> feats;
    std::vector<int> labels;
    feats.reserve(rows.size() * data.input_dim);
    for (std::size_t r : rows) {
        labels.push_back(data.labels[r]);
        for (std::size_t j = 0; j < data.input_dim; ++j)
            feats.push_back(data.features[r * data.input_dim + j]);
    }
    Tape::NodeId x = tape.constant({rows.size(), data.input_dim}, std::move(feats));
    Tape::NodeId logits = supernet_forward(tape, spec, weights, arch, x);
    Tape::NodeId loss = tape.cross_entropy_softmax(logits, labels);
    if (loss_out) *loss_out = loss;

    BatchStats stats;
    stats.loss = tape.value(loss).data[0];
    const Tensor& lg = tape.value(logits);
    std::size_t classes = lg.shape.back();
    std::size_t correct = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double* row = lg.data.data() + r * classes;
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (row[c] > row[best]) best = c;
        if (static_cast<int>(best) == labels[r]) ++correct;
    }
    stats.acc = static_cast<double>(correct) / static_cast<double>(rows.size());
    return stats;
}

void zero_grads(SupernetWeights& w, ArchParams& a) {
    w.for_each([](Tensor& t) { t.zero_grad(); });
    for (Tensor& t : a.alpha) t.zero_grad();
}

}  // namespace

EpochMetrics BilevelTrainer::run_epoch(const Dataset& train, const Dataset& val) {
    if (train.size() == 0 || val.size() == 0)
        throw ConfigError("epoch: empty dataset");
    std::size_t t = epoch_ + 1;  // 1-based epoch being trained
    bool frozen = t <= cfg_.warmup_epochs;
    double lr_w = lr_at(cfg_.weight_lr, t - 1, cfg_.total_epochs);
    double lr_a = lr_at(cfg_.param_lr, t - 1, cfg_.total_epochs);

    std::vector<std::size_t> train_order(train.size()), val_order(val.size());
    for (std::size_t i = 0; i < train_order.size(); ++i) train_order[i] = i;
    for (std::size_t i = 0; i < val_order.size(); ++i) val_order[i] = i;
    std::shuffle(train_order.begin(), train_order.end(), rng_);
    std::shuffle(val_order.begin(), val_order.end(), rng_);

    std::size_t bs = cfg_.batch_size;
    std::size_t steps = std::min(train.size(), val.size()) / bs;
    if (steps == 0) { steps = 1; bs = std::min(train.size(), val.size()); }

    EpochMetrics metrics{t, lr_w, lr_a, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t s = 0; s < steps; ++s) {
        std::span<const std::size_t> val_rows(val_order.data() + s * bs, bs);
        std::span<const std::size_t> train_rows(train_order.data() + s * bs, bs);

        // alpha step on the validation batch (skipped while frozen)
        {
            Tape tape;
            Tape::NodeId loss;
            zero_grads(weights_, arch_);
            BatchStats stats = forward_batch(tape, spec_, weights_, arch_, val,
                                             val_rows, &loss);
            if (!std::isfinite(stats.loss))
                throw TrainingDiverged(t, "non-finite validation loss");
            metrics.val_loss += stats.loss;
            metrics.val_acc += stats.acc;
            if (!frozen) {
                tape.backward(loss);
                param_opt_->step(lr_a, t);
            }
        }
        // omega step on the training batch
        {
            Tape tape;
            Tape::NodeId loss;
            zero_grads(weights_, arch_);
            BatchStats stats = forward_batch(tape, spec_, weights_, arch_, train,
                                             train_rows, &loss);
            if (!std::isfinite(stats.loss))
                throw TrainingDiverged(t, "non-finite training loss");
            metrics.train_loss += stats.loss;
            metrics.train_acc += stats.acc;
            tape.backward(loss);
            weight_opt_->step(lr_w, t);
        }
    }
    metrics.train_loss /= static_cast<double>(steps);
    metrics.train_acc /= static_cast<double>(steps);
    metrics.val_loss /= static_cast<double>(steps);
    metrics.val_acc /= static_cast<double>(steps);
    epoch_ = t;
    return metrics;
}

}  // namespace minidarts
