#ifndef MINIDARTS_HARNESS_HPP
#define MINIDARTS_HARNESS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minidarts/checkpoint.hpp"
#include "minidarts/dataset.hpp"
#include "minidarts/magnitude.hpp"
#include "minidarts/trainer.hpp"

namespace minidarts {

struct RunConfig {
    TrainConfig train;
    DatasetSpec dataset;
    std::size_t nodes_per_cell = 4;
    std::size_t cells = 1;
    std::size_t feature_dim = 8;
    std::filesystem::path out_dir = "run";
    std::size_t checkpoint_every = 1;
};

// Parses the documented JSON config schema; unknown keys are rejected.
// Throws ConfigError on malformed input.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// Supernet spec implied by a run config (applies no_skip op-set reduction).
SupernetSpec build_spec(const RunConfig& cfg);

// Resolves out_dir against the MINIDARTS_OUT env var when set and the path
// is relative.
std::filesystem::path resolve_out_dir(const std::filesystem::path& out_dir);

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<EpochMetrics> metrics;
    MagnitudeTrace trace;
    ArchParams final_arch;
};

// Full search run: trains for total_epochs, appends metrics.csv and
// magnitudes.csv per epoch, saves checkpoints every checkpoint_every epochs
// (plus the final epoch) and writes manifest.json. Deterministic: identical
// config and seed produce byte-identical outputs.
RunResult run_search(const RunConfig& cfg);

// Rebuilds a trainer, restores the run's epoch-`from_epoch` checkpoint and
// trains to total_epochs without touching disk. Test support for the
// checkpoint-resume contract.
ArchParams resume_final_arch(const RunConfig& cfg, std::size_t from_epoch);

struct DeriveEntry {
    std::string label;
    std::size_t epoch;
    std::string genotype_json;
};

// Post-hoc derivation from a finished run directory: reads manifest +
// magnitude trace + checkpoints, applies selective_stop and writes one
// genotype_<label>.json per criterion. Reproducible from disk alone.
std::vector<DeriveEntry> run_derive(const std::filesystem::path& run_dir,
                                    const std::vector<StopCriterion>& criteria);

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t trials = 0;
    bool pass = true;
    std::string worst;  // description of the worst tensor entry
};

// Randomized supernet gradient check against central finite differences.
// corrupt perturbs one autodiff gradient (negative-control fixture).
GradCheckResult gradcheck(std::size_t trials, std::uint64_t seed,
                          double tolerance = 1e-5, bool corrupt = false);

}  // namespace minidarts

#endif
