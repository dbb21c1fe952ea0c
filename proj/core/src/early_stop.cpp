#include "minidarts/early_stop.hpp"

#include <optional>

namespace minidarts {

namespace {

ArchParams copy_arch(const ArchParams& a) {
    ArchParams c;
    for (const Tensor& t : a.alpha) c.alpha.push_back(Tensor(t.shape, t.data, true));
    return c;
}

}  // namespace

EarlyStopResult early_stop_run(const SupernetSpec& spec, const TrainConfig& cfg,
                               const Dataset& train, const Dataset& val,
                               const StopCriterion& criterion,
                               std::size_t patience) {
    BilevelTrainer trainer(spec, cfg);
    EarlyStopResult result;
    result.trace.op_names.clear();
    for (const auto& op : spec.op_set.ops) result.trace.op_names.push_back(op.name);

    std::optional<std::size_t> tracked_op;
    if (const auto* peak = std::get_if<PeakCriterion>(&criterion))
        tracked_op = spec.op_set.index_of(peak->op);
    else if (const auto* res = std::get_if<ResidualPeakCriterion>(&criterion))
        tracked_op = spec.op_set.index_of(res->op);

    PeakPatienceDetector detector(patience);
    ArchParams best_arch;
    std::size_t best_epoch = 0;
    std::vector<std::vector<std::vector<std::size_t>>> ranking_history;

    for (std::size_t t = 1; t <= cfg.total_epochs; ++t) {
        result.metrics.push_back(trainer.run_epoch(train, val));
        std::vector<double> m = magnitude(trainer.arch());
        result.trace.m.push_back(m);

        if (tracked_op) {
            bool final_peak = detector.push(m[*tracked_op]);
            if (detector.peak_epoch() == t) {
                best_arch = copy_arch(trainer.arch());
                best_epoch = t;
            }
            if (final_peak) {
                result.arch = discretize(best_arch);
                result.stop_epoch = best_epoch;
                result.fired = true;
                return result;
            }
        } else if (const auto* sc = std::get_if<SkipCountCriterion>(&criterion)) {
            if (criterion_skip_count(trainer.arch(), spec.op_set, sc->k)) {
                result.arch = discretize(trainer.arch());
                result.stop_epoch = t;
                result.fired = true;
                return result;
            }
        } else {
            const auto& rt = std::get<RankStableCriterion>(criterion);
            ranking_history.push_back(learnable_ranking(trainer.arch(), spec.op_set));
            if (criterion_rank_stable(ranking_history, rt.window)) {
                result.arch = discretize(trainer.arch());
                result.stop_epoch = t;
                result.fired = true;
                return result;
            }
        }
    }
    // Criterion never fired: use the end-of-training architecture.
    result.arch = discretize(trainer.arch());
    result.stop_epoch = cfg.total_epochs;
    result.fired = false;
    return result;
}

}  // namespace minidarts
