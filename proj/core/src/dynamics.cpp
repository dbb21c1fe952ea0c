#include "minidarts/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "minidarts/csv.hpp"
#include "minidarts/numeric.hpp"

namespace minidarts {

std::string to_string(SignConvention c) {
    return c == SignConvention::descent ? "descent" : "ascent";
}

std::string to_string(MomentumVariant v) {
    return v == MomentumVariant::accumulate_grad ? "accumulate_grad"
                                                 : "accumulate_step";
}

std::string to_string(RestorationRule r) {
    switch (r) {
        case RestorationRule::first_crossing: return "first_crossing";
        case RestorationRule::both_within_init: return "both_within_init";
        case RestorationRule::l_inf_zero: return "l_inf_zero";
    }
    return "?";
}

Trajectory run_two_phase(const DynamicsConfig& config) {
    std::size_t d = config.x0.size();
    if (d < 2) throw std::invalid_argument("dynamics: d must be >= 2");
    if (config.dl_dy_phase1.size() != d || config.dl_dy_phase2.size() != d)
        throw std::invalid_argument("dynamics: gradient dimension mismatch");

    Trajectory traj;
    traj.t1 = config.t1;
    std::vector<double> x = config.x0;
    std::vector<double> v(d, 0.0);
    traj.x.push_back(x);
    traj.y.push_back(softmax(x));
    traj.velocity.push_back(v);

    std::size_t total = config.t1 + config.max_steps;
    for (std::size_t t = 0; t < total; ++t) {
        const std::vector<double>& dl_dy =
            t < config.t1 ? config.dl_dy_phase1 : config.dl_dy_phase2;
        std::vector<double> y = softmax(x);
        // dl/dx = J(y)^T dl/dy; with the symmetric Jacobian this is
        // y_i (dl_dy_i - <dl_dy, y>).
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += dl_dy[i] * y[i];
        std::vector<double> g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = y[i] * (dl_dy[i] - dot);
        if (config.sign == SignConvention::ascent)
            for (double& gi : g) gi = -gi;

        if (config.variant == MomentumVariant::accumulate_grad) {
            for (std::size_t i = 0; i < d; ++i) {
                v[i] = config.momentum * v[i] + g[i];
                x[i] -= config.lr * v[i];
            }
        } else {
            for (std::size_t i = 0; i < d; ++i) {
                v[i] = config.momentum * v[i] - config.lr * g[i];
                x[i] += v[i];
            }
        }
        for (double xi : x)
            if (!std::isfinite(xi))
                throw std::runtime_error("dynamics: diverged at step " +
                                         std::to_string(t + 1));
        traj.x.push_back(x);
        traj.y.push_back(softmax(x));
        traj.velocity.push_back(v);
    }
    return traj;
}

std::size_t restoration_epoch(const Trajectory& traj, RestorationRule rule) {
    if (traj.x.size() <= traj.t1)
        throw std::invalid_argument("restoration_epoch: trajectory lacks phase 2");
    const std::vector<double>& x0 = traj.x.front();
    const std::vector<double>& x_t1 = traj.x[traj.t1];
    // The entry that rose during phase 1 (the one phase 2 must pull back).
    std::size_t rise = 0;
    for (std::size_t i = 1; i < x0.size(); ++i)
        if (x_t1[i] - x0[i] > x_t1[rise] - x0[rise]) rise = i;

    for (std::size_t k = 0; traj.t1 + k < traj.x.size(); ++k) {
        const std::vector<double>& xt = traj.x[traj.t1 + k];
        bool restored = false;
        switch (rule) {
            case RestorationRule::first_crossing:
                restored = xt[rise] <= x0[rise];
                break;
            case RestorationRule::both_within_init: {
                restored = true;
                for (std::size_t i = 0; i < x0.size(); ++i) {
                    bool rose = x_t1[i] >= x0[i];
                    if (rose ? xt[i] > x0[i] : xt[i] < x0[i]) restored = false;
                }
                break;
            }
            case RestorationRule::l_inf_zero: {
                double norm = 0.0;
                for (std::size_t i = 0; i < x0.size(); ++i)
                    norm = std::max(norm, std::abs(xt[i] - x0[i]));
                restored = norm <= 1e-12;
                break;
            }
        }
        if (restored) return k;
    }
    throw std::runtime_error("restoration_epoch: rule never satisfied");
}

SweepReport convention_sweep(
    const std::vector<std::pair<double, std::size_t>>& targets) {
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    SweepReport report;
    for (SignConvention sign : {SignConvention::descent, SignConvention::ascent})
        for (MomentumVariant variant :
             {MomentumVariant::accumulate_grad, MomentumVariant::accumulate_step})
            for (RestorationRule rule :
                 {RestorationRule::first_crossing, RestorationRule::both_within_init,
                  RestorationRule::l_inf_zero}) {
                ConventionOutcome outcome;
                outcome.combo = {sign, variant, rule};
                outcome.matched = true;
                for (const auto& [lr, expected] : targets) {
                    DynamicsConfig cfg;
                    cfg.lr = lr;
                    cfg.sign = sign;
                    cfg.variant = variant;
                    cfg.rule = rule;
                    cfg.max_steps = 10000;
                    std::size_t t2 = npos;
                    try {
                        t2 = restoration_epoch(run_two_phase(cfg), rule);
                    } catch (const std::runtime_error&) {
                        // never restored within max_steps
                    }
                    outcome.measured.push_back(t2);
                    if (t2 != expected) outcome.matched = false;
                }
                if (outcome.matched) report.matches.push_back(outcome.combo);
                report.outcomes.push_back(std::move(outcome));
            }
    return report;
}

const ConventionCombo& frozen_convention() {
    // Determined by convention_sweep against the reference targets
    // {(0.001, 34), (0.01, 44)}; first match in enumeration order. The sweep
    // itself is re-run by the test suite to confirm this stays valid.
    static const ConventionCombo combo{SignConvention::descent,
                                       MomentumVariant::accumulate_grad,
                                       RestorationRule::first_crossing};
    return combo;
}

std::vector<std::pair<double, double>> jacobian_magnitude_profile(
    std::size_t grid_size) {
    std::vector<std::pair<double, double>> table;
    for (std::size_t i = 1; i <= grid_size; ++i) {
        double y = static_cast<double>(i) / static_cast<double>(grid_size + 1);
        std::vector<std::vector<double>> jac = softmax_jacobian({y, 1.0 - y});
        double norm = std::abs(jac[0][0]) + std::abs(jac[0][1]);
        table.emplace_back(y, norm);
    }
    return table;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    std::size_t d = traj.x.front().size();
    out << "step";
    for (std::size_t i = 1; i <= d; ++i) out << ",x_" << i;
    for (std::size_t i = 1; i <= d; ++i) out << ",y_" << i;
    out << "\n";
    for (std::size_t t = 0; t < traj.x.size(); ++t) {
        out << t;
        for (double v : traj.x[t]) out << "," << format_double(v);
        for (double v : traj.y[t]) out << "," << format_double(v);
        out << "\n";
    }
    return out.str();
}

}  // namespace minidarts
