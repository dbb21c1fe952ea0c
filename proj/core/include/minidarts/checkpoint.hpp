#ifndef MINIDARTS_CHECKPOINT_HPP
#define MINIDARTS_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "minidarts/magnitude.hpp"
#include "minidarts/trainer.hpp"

namespace minidarts {

// Versioned JSON snapshot of a training run: epoch, omega, A, both optimizer
// states and the RNG state. load(save(c)) is bit-exact for finite doubles.
inline constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(BilevelTrainer& trainer);

// Restores all mutable run state. Throws std::runtime_error on a version or
// shape mismatch.
void restore_from_json(BilevelTrainer& trainer, const nlohmann::json& doc);

void save_checkpoint(BilevelTrainer& trainer, const std::filesystem::path& path);
void load_checkpoint(BilevelTrainer& trainer, const std::filesystem::path& path);

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir,
                                      std::size_t epoch);

// CheckpointStore over a run directory's checkpoints/epoch_<t>.json files.
class DirCheckpointStore : public CheckpointStore {
public:
    explicit DirCheckpointStore(std::filesystem::path run_dir)
        : run_dir_(std::move(run_dir)) {}
    bool has(std::size_t epoch) const override;
    ArchParams load_arch(std::size_t epoch) const override;

private:
    std::filesystem::path run_dir_;
};

}  // namespace minidarts

#endif
