#ifndef MINIDARTS_EARLY_STOP_HPP
#define MINIDARTS_EARLY_STOP_HPP

#include "minidarts/magnitude.hpp"
#include "minidarts/trainer.hpp"

namespace minidarts {

struct EarlyStopResult {
    Architecture arch;
    std::size_t stop_epoch = 0;  // epoch the criterion selected
    bool fired = false;          // false: trained to T, fallback architecture
    MagnitudeTrace trace;
    std::vector<EpochMetrics> metrics;
};

// Single-point online early stop: trains until the criterion fires or T is
// reached, then derives the architecture. Peak/residual criteria use a
// running-max-with-patience rule (the peak is declared final after `patience`
// epochs without improvement) and return the parameters checkpointed at the
// peak epoch; sc/rt criteria stop at their first firing epoch.
EarlyStopResult early_stop_run(const SupernetSpec& spec, const TrainConfig& cfg,
                               const Dataset& train, const Dataset& val,
                               const StopCriterion& criterion,
                               std::size_t patience = 5);

}  // namespace minidarts

#endif
