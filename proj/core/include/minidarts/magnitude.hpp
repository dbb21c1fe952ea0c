#ifndef MINIDARTS_MAGNITUDE_HPP
#define MINIDARTS_MAGNITUDE_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "minidarts/search_space.hpp"

namespace minidarts {

// m(t, o) for all operations over all recorded epochs; epoch t is 1-based,
// trace.m[t-1] holds the magnitude vector of epoch t.
struct MagnitudeTrace {
    std::vector<std::string> op_names;
    std::vector<std::vector<double>> m;

    std::size_t epochs() const { return m.size(); }
    std::size_t op_index(const std::string& name) const;
};

// m(o) = average softmax mass of op o over all N compound edges.
std::vector<double> magnitude(const ArchParams& params);

// Epoch of the magnitude peak of op; ties go to the earliest epoch.
std::size_t criterion_peak(const MagnitudeTrace& trace, std::size_t op);

// Epoch maximizing sum_{j != i} (m(t, op_i) - m(t, op_j)); ties earliest.
// The score equals M * m(t, op_i) - 1 under exact normalization. Throws
// std::domain_error when the trace has a single op.
std::size_t criterion_residual_peak(const MagnitudeTrace& trace, std::size_t op);

double residual_score(const std::vector<double>& m, std::size_t op);

// True iff discretize(params) assigns skip_connect to at least k edges.
// Throws std::domain_error when the op set lacks skip_connect.
bool criterion_skip_count(const ArchParams& params, const OperationSet& op_set,
                          std::size_t k);

// Per-edge descending ranking of learnable-op alpha values.
std::vector<std::vector<std::size_t>> learnable_ranking(const ArchParams& params,
                                                        const OperationSet& op_set);

// True iff the per-edge learnable-op ranking is identical across the last
// `window` recorded epochs. Insufficient history returns false.
bool criterion_rank_stable(
    const std::vector<std::vector<std::vector<std::size_t>>>& ranking_history,
    std::size_t window);

// Online peak rule: the running max is declared final after `patience`
// epochs without improvement. Feed one value per epoch via push().
class PeakPatienceDetector {
public:
    explicit PeakPatienceDetector(std::size_t patience) : patience_(patience) {}

    // Returns true once the peak is final; peak_epoch() then names it.
    bool push(double value) {
        ++epoch_;
        if (value > best_value_) {
            best_value_ = value;
            best_epoch_ = epoch_;
            return false;
        }
        return epoch_ - best_epoch_ >= patience_;
    }

    std::size_t peak_epoch() const { return best_epoch_; }

private:
    std::size_t patience_;
    std::size_t epoch_ = 0;
    std::size_t best_epoch_ = 0;
    double best_value_ = -std::numeric_limits<double>::infinity();
};

struct PeakCriterion { std::string op; };
struct ResidualPeakCriterion { std::string op; };
struct SkipCountCriterion { std::size_t k = 2; };
struct RankStableCriterion { std::size_t window = 10; };
using StopCriterion = std::variant<PeakCriterion, ResidualPeakCriterion,
                                   SkipCountCriterion, RankStableCriterion>;

// Stable label used for output file names, e.g. "peak_op_large", "sc_2".
std::string criterion_label(const StopCriterion& criterion);

// Parses "peak:op_large", "residual:op_large", "sc:2", "rt:10".
StopCriterion parse_criterion(const std::string& text);

// Access to per-epoch checkpointed architecture parameters (1-based epochs).
class CheckpointStore {
public:
    virtual ~CheckpointStore() = default;
    virtual bool has(std::size_t epoch) const = 0;
    virtual ArchParams load_arch(std::size_t epoch) const = 0;
};

class IntegrityError : public std::runtime_error {
public:
    IntegrityError(std::size_t at_epoch, const std::string& what)
        : std::runtime_error(what), epoch(at_epoch) {}
    std::size_t epoch;
};

struct DerivedArchitecture {
    std::size_t epoch;
    Architecture arch;
};

// Epoch a criterion selects over a finished run: the magnitude peak for
// peak/residual criteria, the first firing epoch for sc/rt, with the final
// epoch as fallback when an online criterion never fires.
std::size_t criterion_epoch(const StopCriterion& criterion,
                            const MagnitudeTrace& trace,
                            const OperationSet& op_set,
                            const CheckpointStore& checkpoints);

// Multi-point selective stop: for each criterion, roll back to its epoch's
// checkpoint and discretize the stored parameters. Throws IntegrityError when
// the selected checkpoint is missing.
std::map<std::string, DerivedArchitecture> selective_stop(
    const MagnitudeTrace& trace, const OperationSet& op_set,
    const CheckpointStore& checkpoints,
    const std::vector<StopCriterion>& criteria);

}  // namespace minidarts

#endif
