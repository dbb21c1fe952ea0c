#include "minidarts/magnitude.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "minidarts/numeric.hpp"

namespace minidarts {

std::size_t MagnitudeTrace::op_index(const std::string& name) const {
    for (std::size_t i = 0; i < op_names.size(); ++i)
        if (op_names[i] == name) return i;
    throw std::domain_error("magnitude trace: unknown op " + name);
}

std::vector<double> magnitude(const ArchParams& params) {
    if (params.alpha.empty())
        throw std::invalid_argument("magnitude: no edges");
    std::size_t m_ops = params.alpha.front().size();
    std::vector<double> m(m_ops, 0.0);
    for (const Tensor& a : params.alpha) {
        std::vector<double> y = softmax(a.data);
        for (std::size_t o = 0; o < m_ops; ++o) m[o] += y[o];
    }
    for (double& v : m) v /= static_cast<double>(params.alpha.size());
    return m;
}

std::size_t criterion_peak(const MagnitudeTrace& trace, std::size_t op) {
    if (trace.epochs() == 0)
        throw std::invalid_argument("criterion_peak: empty trace");
    std::size_t best = 0;
    for (std::size_t t = 1; t < trace.epochs(); ++t)
        if (trace.m[t][op] > trace.m[best][op]) best = t;
    return best + 1;
}

double residual_score(const std::vector<double>& m, std::size_t op) {
    double score = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (j != op) score += m[op] - m[j];
    return score;
}

std::size_t criterion_residual_peak(const MagnitudeTrace& trace, std::size_t op) {
    if (trace.epochs() == 0)
        throw std::invalid_argument("criterion_residual_peak: empty trace");
    if (trace.m.front().size() < 2)
        throw std::domain_error("criterion_residual_peak: requires M >= 2");
    std::size_t best = 0;
    double best_score = residual_score(trace.m[0], op);
    for (std::size_t t = 1; t < trace.epochs(); ++t) {
        double score = residual_score(trace.m[t], op);
        if (score > best_score) {
            best = t;
            best_score = score;
        }
    }
    return best + 1;
}

bool criterion_skip_count(const ArchParams& params, const OperationSet& op_set,
                          std::size_t k) {
    std::size_t skip = op_set.index_of("skip_connect");  // throws if absent
    Architecture arch = discretize(params);
    std::size_t count = 0;
    for (std::size_t choice : arch.choice)
        if (choice == skip) ++count;
    return count >= k;
}

std::vector<std::vector<std::size_t>> learnable_ranking(const ArchParams& params,
                                                        const OperationSet& op_set) {
    std::vector<std::size_t> learnable;
    for (std::size_t i = 0; i < op_set.count(); ++i)
        if (op_set.ops[i].learnable()) learnable.push_back(i);
    std::vector<std::vector<std::size_t>> ranking;
    for (const Tensor& a : params.alpha) {
        std::vector<std::size_t> order = learnable;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return a.data[x] > a.data[y];
        });
        ranking.push_back(std::move(order));
    }
    return ranking;
}

bool criterion_rank_stable(
    const std::vector<std::vector<std::vector<std::size_t>>>& ranking_history,
    std::size_t window) {
    if (window == 0) throw std::domain_error("criterion_rank_stable: window must be >= 1");
    if (ranking_history.size() < window) return false;
    const auto& last = ranking_history.back();
    for (std::size_t i = ranking_history.size() - window; i < ranking_history.size(); ++i)
        if (ranking_history[i] != last) return false;
    return true;
}

std::string criterion_label(const StopCriterion& criterion) {
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PeakCriterion>)
                return "peak_" + c.op;
            else if constexpr (std::is_same_v<T, ResidualPeakCriterion>)
                return "residual_" + c.op;
            else if constexpr (std::is_same_v<T, SkipCountCriterion>)
                return "sc_" + std::to_string(c.k);
            else
                return "rt_" + std::to_string(c.window);
        },
        criterion);
}

StopCriterion parse_criterion(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("criterion: expected kind:arg, got " + text);
    std::string kind = text.substr(0, colon);
    std::string arg = text.substr(colon + 1);
    if (kind == "peak") return PeakCriterion{arg};
    if (kind == "residual") return ResidualPeakCriterion{arg};
    if (kind == "sc") return SkipCountCriterion{static_cast<std::size_t>(std::stoul(arg))};
    if (kind == "rt") return RankStableCriterion{static_cast<std::size_t>(std::stoul(arg))};
    throw std::invalid_argument("criterion: unknown kind " + kind);
}

namespace {

ArchParams load_or_throw(const CheckpointStore& store, std::size_t epoch) {
    if (!store.has(epoch))
        throw IntegrityError(epoch, "missing checkpoint for epoch " +
                                        std::to_string(epoch));
    return store.load_arch(epoch);
}

}  // namespace

std::size_t criterion_epoch(const StopCriterion& criterion,
                            const MagnitudeTrace& trace,
                            const OperationSet& op_set,
                            const CheckpointStore& checkpoints) {
    std::size_t total = trace.epochs();
    if (total == 0) throw std::invalid_argument("criterion_epoch: empty trace");
    return std::visit(
        [&](const auto& c) -> std::size_t {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PeakCriterion>) {
                return criterion_peak(trace, trace.op_index(c.op));
            } else if constexpr (std::is_same_v<T, ResidualPeakCriterion>) {
                return criterion_residual_peak(trace, trace.op_index(c.op));
            } else if constexpr (std::is_same_v<T, SkipCountCriterion>) {
                for (std::size_t t = 1; t <= total; ++t)
                    if (criterion_skip_count(load_or_throw(checkpoints, t), op_set, c.k))
                        return t;
                return total;  // never fired: end-of-training architecture
            } else {
                std::vector<std::vector<std::vector<std::size_t>>> history;
                for (std::size_t t = 1; t <= total; ++t) {
                    history.push_back(
                        learnable_ranking(load_or_throw(checkpoints, t), op_set));
                    if (criterion_rank_stable(history, c.window)) return t;
                }
                return total;
            }
        },
        criterion);
}

std::map<std::string, DerivedArchitecture> selective_stop(
    const MagnitudeTrace& trace, const OperationSet& op_set,
    const CheckpointStore& checkpoints,
    const std::vector<StopCriterion>& criteria) {
    std::map<std::string, DerivedArchitecture> result;
    for (const StopCriterion& c : criteria) {
        std::size_t epoch = criterion_epoch(c, trace, op_set, checkpoints);
        ArchParams params = load_or_throw(checkpoints, epoch);
        result[criterion_label(c)] = DerivedArchitecture{epoch, discretize(params)};
    }
    return result;
}

}  // namespace minidarts
