#include "minidarts/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "minidarts/csv.hpp"
#include "minidarts/numeric.hpp"
#include "minidarts/tape.hpp"

namespace minidarts {

namespace {

const char* kManifestVersion = "minidarts-1";

LrSchedule schedule_from_json(const nlohmann::json& doc) {
    std::string kind = doc.at("kind").get<std::string>();
    if (kind == "constant") return LrSchedule::constant(doc.at("lr").get<double>());
    if (kind == "cosine")
        return LrSchedule::cosine(doc.at("lr_max").get<double>(),
                                  doc.at("lr_min").get<double>());
    throw ConfigError("unknown lr schedule kind: " + kind);
}

nlohmann::json schedule_to_json(const LrSchedule& s) {
    if (s.kind == LrSchedule::Kind::constant)
        return {{"kind", "constant"}, {"lr", s.lr_max}};
    return {{"kind", "cosine"}, {"lr_max", s.lr_max}, {"lr_min", s.lr_min}};
}

OptKind opt_kind_from_string(const std::string& s) {
    if (s == "sgd_momentum") return OptKind::sgd_momentum;
    if (s == "adaptive_moment") return OptKind::adaptive_moment;
    throw ConfigError("unknown optimizer kind: " + s);
}

std::string opt_kind_to_string(OptKind k) {
    return k == OptKind::sgd_momentum ? "sgd_momentum" : "adaptive_moment";
}

}  // namespace

namespace {

void reject_unknown_keys(const nlohmann::json& doc,
                         std::initializer_list<const char*> allowed,
                         const std::string& scope) {
    if (!doc.is_object()) throw ConfigError("config: " + scope + " must be an object");
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw ConfigError("config: unknown key \"" + item.key() + "\" in " + scope);
    }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc) {
    reject_unknown_keys(doc,
                        {"preset", "total_epochs", "warmup_epochs", "batch_size",
                         "seed", "weight_lr", "param_lr", "param_weight_decay",
                         "weight_weight_decay", "weight_optimizer", "param_optimizer",
                         "dataset", "supernet", "out_dir", "checkpoint_every"},
                        "top level");
    if (doc.contains("dataset"))
        reject_unknown_keys(doc.at("dataset"),
                            {"generator", "n", "classes", "input_dim", "noise", "seed"},
                            "dataset");
    if (doc.contains("supernet"))
        reject_unknown_keys(doc.at("supernet"),
                            {"nodes_per_cell", "cells", "feature_dim"}, "supernet");
    RunConfig cfg;
    try {
        if (doc.contains("preset"))
            cfg.train = apply_scheme(doc.at("preset").get<std::string>());
        if (doc.contains("total_epochs"))
            cfg.train.total_epochs = doc.at("total_epochs").get<std::size_t>();
        if (doc.contains("warmup_epochs"))
            cfg.train.warmup_epochs = doc.at("warmup_epochs").get<std::size_t>();
        if (doc.contains("batch_size"))
            cfg.train.batch_size = doc.at("batch_size").get<std::size_t>();
        if (doc.contains("seed")) cfg.train.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("weight_lr"))
            cfg.train.weight_lr = schedule_from_json(doc.at("weight_lr"));
        if (doc.contains("param_lr"))
            cfg.train.param_lr = schedule_from_json(doc.at("param_lr"));
        if (doc.contains("param_weight_decay"))
            cfg.train.param_weight_decay = doc.at("param_weight_decay").get<double>();
        if (doc.contains("weight_weight_decay"))
            cfg.train.weight_weight_decay = doc.at("weight_weight_decay").get<double>();
        if (doc.contains("weight_optimizer"))
            cfg.train.weight_opt_kind =
                opt_kind_from_string(doc.at("weight_optimizer").get<std::string>());
        if (doc.contains("param_optimizer"))
            cfg.train.param_opt_kind =
                opt_kind_from_string(doc.at("param_optimizer").get<std::string>());
        if (doc.contains("dataset")) {
            const auto& d = doc.at("dataset");
            if (d.contains("generator"))
                cfg.dataset.generator = d.at("generator").get<std::string>();
            if (d.contains("n")) cfg.dataset.n = d.at("n").get<std::size_t>();
            if (d.contains("classes"))
                cfg.dataset.classes = d.at("classes").get<std::size_t>();
            if (d.contains("input_dim"))
                cfg.dataset.input_dim = d.at("input_dim").get<std::size_t>();
            if (d.contains("noise")) cfg.dataset.noise = d.at("noise").get<double>();
            if (d.contains("seed")) cfg.dataset.seed = d.at("seed").get<std::uint64_t>();
        }
        if (doc.contains("supernet")) {
            const auto& s = doc.at("supernet");
            if (s.contains("nodes_per_cell"))
                cfg.nodes_per_cell = s.at("nodes_per_cell").get<std::size_t>();
            if (s.contains("cells")) cfg.cells = s.at("cells").get<std::size_t>();
            if (s.contains("feature_dim"))
                cfg.feature_dim = s.at("feature_dim").get<std::size_t>();
        }
        if (doc.contains("out_dir"))
            cfg.out_dir = doc.at("out_dir").get<std::string>();
        if (doc.contains("checkpoint_every"))
            cfg.checkpoint_every = doc.at("checkpoint_every").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (cfg.checkpoint_every == 0)
        throw ConfigError("checkpoint_every must be positive");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(doc);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return {
        {"preset", cfg.train.scheme_name},
        {"total_epochs", cfg.train.total_epochs},
        {"warmup_epochs", cfg.train.warmup_epochs},
        {"batch_size", cfg.train.batch_size},
        {"seed", cfg.train.seed},
        {"weight_lr", schedule_to_json(cfg.train.weight_lr)},
        {"param_lr", schedule_to_json(cfg.train.param_lr)},
        {"param_weight_decay", cfg.train.param_weight_decay},
        {"weight_weight_decay", cfg.train.weight_weight_decay},
        {"weight_optimizer", opt_kind_to_string(cfg.train.weight_opt_kind)},
        {"param_optimizer", opt_kind_to_string(cfg.train.param_opt_kind)},
        {"dataset",
         {{"generator", cfg.dataset.generator},
          {"n", cfg.dataset.n},
          {"classes", cfg.dataset.classes},
          {"input_dim", cfg.dataset.input_dim},
          {"noise", cfg.dataset.noise},
          {"seed", cfg.dataset.seed}}},
        {"supernet",
         {{"nodes_per_cell", cfg.nodes_per_cell},
          {"cells", cfg.cells},
          {"feature_dim", cfg.feature_dim}}},
        {"out_dir", cfg.out_dir.string()},
        {"checkpoint_every", cfg.checkpoint_every},
    };
}

SupernetSpec build_spec(const RunConfig& cfg) {
    SupernetSpec spec;
    spec.nodes_per_cell = cfg.nodes_per_cell;
    spec.cells = cfg.cells;
    spec.feature_dim = cfg.feature_dim;
    spec.input_dim = cfg.dataset.input_dim;
    spec.classes = cfg.dataset.classes;
    spec.op_set = OperationSet::default_set();
    if (cfg.train.remove_skip) spec.op_set = spec.op_set.without("skip_connect");
    return spec;
}

std::filesystem::path resolve_out_dir(const std::filesystem::path& out_dir) {
    const char* root = std::getenv("MINIDARTS_OUT");
    if (root && out_dir.is_relative()) return std::filesystem::path(root) / out_dir;
    return out_dir;
}

namespace {

std::string metrics_row(const EpochMetrics& m) {
    std::ostringstream row;
    row << m.epoch << ',' << format_double(m.lr_w) << ',' << format_double(m.lr_a)
        << ',' << format_double(m.train_loss) << ',' << format_double(m.train_acc)
        << ',' << format_double(m.val_loss) << ',' << format_double(m.val_acc)
        << '\n';
    return row.str();
}

nlohmann::json op_set_to_json(const OperationSet& ops) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& op : ops.ops) {
        std::string kind;
        switch (op.kind) {
            case OpKind::zeroize: kind = "zeroize"; break;
            case OpKind::identity: kind = "identity"; break;
            case OpKind::affine_relu: kind = "affine_relu"; break;
            case OpKind::double_affine_relu: kind = "double_affine_relu"; break;
            case OpKind::window_mean: kind = "window_mean"; break;
        }
        out.push_back({{"name", op.name}, {"kind", kind}});
    }
    return out;
}

OperationSet op_set_from_json(const nlohmann::json& doc) {
    OperationSet ops;
    for (const auto& entry : doc) {
        std::string kind = entry.at("kind").get<std::string>();
        OpKind k;
        if (kind == "zeroize") k = OpKind::zeroize;
        else if (kind == "identity") k = OpKind::identity;
        else if (kind == "affine_relu") k = OpKind::affine_relu;
        else if (kind == "double_affine_relu") k = OpKind::double_affine_relu;
        else if (kind == "window_mean") k = OpKind::window_mean;
        else throw ConfigError("manifest: unknown op kind " + kind);
        ops.ops.push_back({entry.at("name").get<std::string>(), k});
    }
    return ops;
}

}  // namespace

RunResult run_search(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::path out = resolve_out_dir(cfg.out_dir);
    fs::create_directories(out / "checkpoints");

    SupernetSpec spec = build_spec(cfg);
    Dataset full = generate_dataset(cfg.dataset);
    auto [train, val] = split_train_val(full, cfg.dataset.seed + 1);

    BilevelTrainer trainer(spec, cfg.train);

    std::ofstream metrics(out / "metrics.csv");
    metrics << "epoch,lr_w,lr_a,train_loss,train_acc,val_loss,val_acc\n";
    std::ofstream magnitudes(out / "magnitudes.csv");
    magnitudes << "epoch";
    for (const auto& op : spec.op_set.ops) magnitudes << ',' << op.name;
    magnitudes << '\n';

    {
        nlohmann::json manifest = {{"version", kManifestVersion},
                                   {"config", run_config_to_json(cfg)},
                                   {"op_set", op_set_to_json(spec.op_set)}};
        std::ofstream mf(out / "manifest.json");
        mf << manifest.dump(2) << '\n';
    }

    RunResult result;
    result.out_dir = out;
    result.trace.op_names.clear();
    for (const auto& op : spec.op_set.ops) result.trace.op_names.push_back(op.name);

    for (std::size_t t = 1; t <= cfg.train.total_epochs; ++t) {
        EpochMetrics em = trainer.run_epoch(train, val);
        result.metrics.push_back(em);
        metrics << metrics_row(em);

        std::vector<double> m = magnitude(trainer.arch());
        result.trace.m.push_back(m);
        magnitudes << t;
        for (double v : m) magnitudes << ',' << format_double(v);
        magnitudes << '\n';

        if (t % cfg.checkpoint_every == 0 || t == cfg.train.total_epochs)
            save_checkpoint(trainer, checkpoint_path(out, t));
    }
    for (const Tensor& a : trainer.arch().alpha)
        result.final_arch.alpha.push_back(Tensor(a.shape, a.data, true));
    return result;
}

ArchParams resume_final_arch(const RunConfig& cfg, std::size_t from_epoch) {
    SupernetSpec spec = build_spec(cfg);
    Dataset full = generate_dataset(cfg.dataset);
    auto [train, val] = split_train_val(full, cfg.dataset.seed + 1);
    BilevelTrainer trainer(spec, cfg.train);
    load_checkpoint(trainer, checkpoint_path(resolve_out_dir(cfg.out_dir), from_epoch));
    while (trainer.epoch() < cfg.train.total_epochs) trainer.run_epoch(train, val);
    ArchParams arch;
    for (const Tensor& a : trainer.arch().alpha)
        arch.alpha.push_back(Tensor(a.shape, a.data, true));
    return arch;
}

std::vector<DeriveEntry> run_derive(const std::filesystem::path& run_dir,
                                    const std::vector<StopCriterion>& criteria) {
    namespace fs = std::filesystem;
    std::ifstream mf(run_dir / "manifest.json");
    if (!mf) throw ConfigError("cannot open manifest in " + run_dir.string());
    nlohmann::json manifest = nlohmann::json::parse(mf);
    RunConfig cfg = run_config_from_json(manifest.at("config"));
    SupernetSpec spec = build_spec(cfg);
    spec.op_set = op_set_from_json(manifest.at("op_set"));

    CsvTable mags = read_csv((run_dir / "magnitudes.csv").string());
    MagnitudeTrace trace;
    trace.op_names.assign(mags.header.begin() + 1, mags.header.end());
    for (const auto& row : mags.rows) {
        std::vector<double> m;
        for (std::size_t i = 1; i < row.size(); ++i) m.push_back(std::stod(row[i]));
        trace.m.push_back(std::move(m));
    }

    DirCheckpointStore store(run_dir);
    auto derived = selective_stop(trace, spec.op_set, store, criteria);

    std::vector<DeriveEntry> entries;
    for (const auto& [label, d] : derived) {
        DeriveEntry entry;
        entry.label = label;
        entry.epoch = d.epoch;
        entry.genotype_json = genotype_json(d.arch, spec);
        std::ofstream out(run_dir / ("genotype_" + label + ".json"));
        out << entry.genotype_json << '\n';
        entries.push_back(std::move(entry));
    }
    return entries;
}

GradCheckResult gradcheck(std::size_t trials, std::uint64_t seed, double tolerance,
                          bool corrupt) {
    GradCheckResult result;
    result.trials = trials;
    std::mt19937_64 rng(seed);

    for (std::size_t trial = 0; trial < trials; ++trial) {
        SupernetSpec spec;
        spec.nodes_per_cell = 3 + rng() % 2;  // 3 or 4
        spec.cells = 1 + rng() % 2;           // 1..2
        spec.feature_dim = 4 + 2 * (rng() % 2);
        if (trial % 10 == 5) {  // periodically exercise the larger shapes
            spec.feature_dim = 8;
            spec.cells = 3;
        } else if (trial % 25 == 12) {
            spec.feature_dim = 16;
            spec.cells = 1;
            spec.nodes_per_cell = 3;
        }
        spec.input_dim = 2 + rng() % 6;
        spec.classes = 2 + rng() % 3;

        std::size_t batch = 2 + rng() % 3;
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<double> feats(batch * spec.input_dim);
        std::vector<int> labels(batch);

        SupernetWeights weights = SupernetWeights::init(spec, rng());
        ArchParams arch = ArchParams::zeros(spec.num_edges(), spec.op_set.count());
        // kink-margin guard: resample until no relu input sits near zero
        double margin = 0.0;
        for (int attempt = 0; attempt < 50 && margin < 1e-3; ++attempt) {
            for (double& v : feats) v = unit(rng);
            for (int& l : labels) l = static_cast<int>(rng() % spec.classes);
            weights = SupernetWeights::init(spec, rng());
            for (Tensor& a : arch.alpha)
                for (double& v : a.data) v = 0.5 * unit(rng);
            Tape probe;
            Tape::NodeId x = probe.constant({batch, spec.input_dim},
                                            std::vector<double>(feats));
            supernet_forward(probe, spec, weights, arch, x);
            margin = probe.min_relu_input_abs();
        }

        auto loss_value = [&]() {
            Tape tape;
            Tape::NodeId x =
                tape.constant({batch, spec.input_dim}, std::vector<double>(feats));
            Tape::NodeId logits = supernet_forward(tape, spec, weights, arch, x);
            return tape.value(tape.cross_entropy_softmax(logits, labels)).data[0];
        };

        // autodiff gradients
        weights.for_each([](Tensor& t) { t.zero_grad(); });
        for (Tensor& a : arch.alpha) a.zero_grad();
        {
            Tape tape;
            Tape::NodeId x =
                tape.constant({batch, spec.input_dim}, std::vector<double>(feats));
            Tape::NodeId logits = supernet_forward(tape, spec, weights, arch, x);
            tape.backward(tape.cross_entropy_softmax(logits, labels));
        }
        if (corrupt && !arch.alpha.empty() && !arch.alpha[0].grad.empty())
            arch.alpha[0].grad[0] += 1.0;

        const double eps = 1e-5;
        std::size_t tensor_idx = 0;
        auto check_tensor = [&](Tensor& t, const std::string& tag) {
            for (std::size_t j = 0; j < t.size(); ++j) {
                double orig = t.data[j];
                t.data[j] = orig + eps;
                double hi = loss_value();
                t.data[j] = orig - eps;
                double lo = loss_value();
                t.data[j] = orig;
                double fd = (hi - lo) / (2.0 * eps);
                double ad = t.grad.empty() ? 0.0 : t.grad[j];
                double rel = std::abs(ad - fd) /
                             std::max({std::abs(ad), std::abs(fd), 1e-3});
                if (rel > result.max_rel_err) {
                    result.max_rel_err = rel;
                    result.worst = tag + "[" + std::to_string(j) + "] trial " +
                                   std::to_string(trial);
                }
            }
            ++tensor_idx;
        };
        weights.for_each(
            [&](Tensor& t) { check_tensor(t, "omega#" + std::to_string(tensor_idx)); });
        for (std::size_t e = 0; e < arch.alpha.size(); ++e)
            check_tensor(arch.alpha[e], "alpha#" + std::to_string(e));
    }
    result.pass = result.max_rel_err <= tolerance;
    return result;
}

}  // namespace minidarts
