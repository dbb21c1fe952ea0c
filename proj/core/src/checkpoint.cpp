#include "minidarts/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace minidarts {

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
    return {{"shape", t.shape}, {"data", t.data}};
}

void tensor_from_json(Tensor& t, const nlohmann::json& doc) {
    auto shape = doc.at("shape").get<std::vector<std::size_t>>();
    auto data = doc.at("data").get<std::vector<double>>();
    if (shape != t.shape || data.size() != t.data.size())
        throw std::runtime_error("checkpoint: tensor shape mismatch");
    t.data = std::move(data);
}

nlohmann::json optimizer_to_json(Optimizer& opt) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : opt.states())
        states.push_back({{"velocity", s.velocity}, {"second_moment", s.second_moment}});
    return {{"step_count", opt.step_count()}, {"states", std::move(states)}};
}

void optimizer_from_json(Optimizer& opt, const nlohmann::json& doc) {
    opt.step_count() = doc.at("step_count").get<std::size_t>();
    const auto& states = doc.at("states");
    if (states.size() != opt.states().size())
        throw std::runtime_error("checkpoint: optimizer state count mismatch");
    for (std::size_t i = 0; i < opt.states().size(); ++i) {
        opt.states()[i].velocity = states[i].at("velocity").get<std::vector<double>>();
        opt.states()[i].second_moment =
            states[i].at("second_moment").get<std::vector<double>>();
    }
}

}  // namespace

nlohmann::json checkpoint_to_json(BilevelTrainer& trainer) {
    nlohmann::json weights = nlohmann::json::array();
    trainer.weights().for_each([&](Tensor& t) { weights.push_back(tensor_to_json(t)); });
    nlohmann::json arch = nlohmann::json::array();
    for (const Tensor& a : trainer.arch().alpha) arch.push_back(a.data);
    std::ostringstream rng;
    rng << trainer.rng();
    return {{"version", kCheckpointVersion},
            {"epoch", trainer.epoch()},
            {"weights", std::move(weights)},
            {"arch", std::move(arch)},
            {"opt_w", optimizer_to_json(trainer.weight_opt())},
            {"opt_a", optimizer_to_json(trainer.param_opt())},
            {"rng", rng.str()}};
}

void restore_from_json(BilevelTrainer& trainer, const nlohmann::json& doc) {
    if (doc.at("version").get<int>() != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version");
    trainer.set_epoch(doc.at("epoch").get<std::size_t>());
    const auto& weights = doc.at("weights");
    std::size_t i = 0;
    trainer.weights().for_each([&](Tensor& t) {
        if (i >= weights.size())
            throw std::runtime_error("checkpoint: weight tensor count mismatch");
        tensor_from_json(t, weights[i++]);
    });
    if (i != weights.size())
        throw std::runtime_error("checkpoint: weight tensor count mismatch");
    const auto& arch = doc.at("arch");
    if (arch.size() != trainer.arch().alpha.size())
        throw std::runtime_error("checkpoint: arch edge count mismatch");
    for (std::size_t e = 0; e < arch.size(); ++e) {
        auto data = arch[e].get<std::vector<double>>();
        if (data.size() != trainer.arch().alpha[e].size())
            throw std::runtime_error("checkpoint: arch vector length mismatch");
        trainer.arch().alpha[e].data = std::move(data);
    }
    optimizer_from_json(trainer.weight_opt(), doc.at("opt_w"));
    optimizer_from_json(trainer.param_opt(), doc.at("opt_a"));
    std::istringstream rng(doc.at("rng").get<std::string>());
    rng >> trainer.rng();
}

void save_checkpoint(BilevelTrainer& trainer, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << checkpoint_to_json(trainer).dump();
}

void load_checkpoint(BilevelTrainer& trainer, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in);
    restore_from_json(trainer, doc);
}

std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir,
                                      std::size_t epoch) {
    return run_dir / "checkpoints" / ("epoch_" + std::to_string(epoch) + ".json");
}

bool DirCheckpointStore::has(std::size_t epoch) const {
    return std::filesystem::exists(checkpoint_path(run_dir_, epoch));
}

ArchParams DirCheckpointStore::load_arch(std::size_t epoch) const {
    std::ifstream in(checkpoint_path(run_dir_, epoch));
    if (!in)
        throw IntegrityError(epoch, "missing checkpoint for epoch " +
                                        std::to_string(epoch));
    nlohmann::json doc = nlohmann::json::parse(in);
    ArchParams params;
    for (const auto& entry : doc.at("arch")) {
        auto data = entry.get<std::vector<double>>();
        std::size_t len = data.size();
        params.alpha.push_back(Tensor({len}, std::move(data), true));
    }
    return params;
}

}  // namespace minidarts
