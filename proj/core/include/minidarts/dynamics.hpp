#ifndef MINIDARTS_DYNAMICS_HPP
#define MINIDARTS_DYNAMICS_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace minidarts {

enum class SignConvention { descent, ascent };

// Two momentum-SGD bookkeeping variants:
//   accumulate_grad: v <- mu v + g;       x <- x - lr v
//   accumulate_step: v <- mu v - lr g;    x <- x + v
enum class MomentumVariant { accumulate_grad, accumulate_step };

enum class RestorationRule { first_crossing, both_within_init, l_inf_zero };

std::string to_string(SignConvention c);
std::string to_string(MomentumVariant v);
std::string to_string(RestorationRule r);

// Two-phase gradient-reversal study of a softmax head under momentum SGD.
// dl_dy_phase2 is the phase-2 loss gradient wrt y (the default setup negates
// phase 1). One epoch = one optimizer step.
struct DynamicsConfig {
    std::vector<double> x0 = {0.001, 0.001};
    std::vector<double> dl_dy_phase1 = {1.0, -1.0};
    std::vector<double> dl_dy_phase2 = {-1.0, 1.0};
    std::size_t t1 = 25;
    double lr = 0.001;
    double momentum = 0.9;
    std::size_t max_steps = 100000;
    SignConvention sign = SignConvention::descent;
    MomentumVariant variant = MomentumVariant::accumulate_grad;
    RestorationRule rule = RestorationRule::first_crossing;
};

struct Trajectory {
    // One entry per recorded step, x[0] == x0; x[t1] ends phase 1.
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> velocity;
    std::size_t t1 = 0;
};

// Runs t1 phase-1 steps then max_steps phase-2 steps. The parameter gradient
// is J(y)^T dl_dy at every step. Throws std::runtime_error carrying the step
// index if the iterate becomes non-finite.
Trajectory run_two_phase(const DynamicsConfig& config);

// Number of phase-2 steps until the rule is satisfied (0 when the phase-1
// endpoint already satisfies it). Throws std::runtime_error when the rule is
// never satisfied within the recorded trajectory.
std::size_t restoration_epoch(const Trajectory& traj, RestorationRule rule);

struct ConventionCombo {
    SignConvention sign;
    MomentumVariant variant;
    RestorationRule rule;
};

struct ConventionOutcome {
    ConventionCombo combo;
    // Measured t2 per target learning rate; npos when never restored.
    std::vector<std::size_t> measured;
    bool matched = false;
};

struct SweepReport {
    std::vector<ConventionOutcome> outcomes;
    std::vector<ConventionCombo> matches;  // all combos hitting every target
    bool has_match() const { return !matches.empty(); }
    // Lexicographically first match in enumeration order; only valid when
    // has_match().
    ConventionCombo frozen() const { return matches.front(); }
};

// Brute-force enumeration of sign x momentum-variant x restoration-rule
// combinations against (lr, t2) targets. Deterministic.
SweepReport convention_sweep(
    const std::vector<std::pair<double, std::size_t>>& targets);

// The convention frozen against the reference targets {(0.001, 34), (0.01, 44)}.
const ConventionCombo& frozen_convention();

// (y_i, L1 norm of the softmax Jacobian row) over a grid of y_i in (0,1),
// d = 2. The closed form is 2 y (1 - y).
std::vector<std::pair<double, double>> jacobian_magnitude_profile(
    std::size_t grid_size);

// CSV trajectory dump: step, x_1..x_d, y_1..y_d.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace minidarts

#endif
