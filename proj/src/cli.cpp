#include "fmda/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fmda/checkpoint.hpp"
#include "fmda/config.hpp"
#include "fmda/dann.hpp"
#include "fmda/datagen.hpp"
#include "fmda/errors.hpp"
#include "fmda/metrics.hpp"
#include "fmda/rng.hpp"
#include "fmda/sampling.hpp"
#include "fmda/suite.hpp"
#include "fmda/training.hpp"

namespace fmda::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string with_default(std::string desc, const std::string& def) {
    return desc + " (default: " + def + ")";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// Options whose values are applied only when given on the command line.
template <class Target>
class Overrides {
public:
    explicit Overrides(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& name, const std::string& desc, const std::string& def,
                     std::function<void(Target&, const T&)> set) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app_->add_option(name, *value, with_default(desc, def));
        setters_.push_back([opt, value, set](Target& t) {
            if (opt->count() > 0) set(t, *value);
        });
        return opt;
    }

    CLI::Option* flag(const std::string& name, const std::string& desc,
                      std::function<void(Target&, bool)> set) {
        auto value = std::make_shared<bool>(false);
        CLI::Option* opt = app_->add_flag(name, *value, with_default(desc, "off"));
        setters_.push_back([opt, value, set](Target& t) {
            if (opt->count() > 0) set(t, *value);
        });
        return opt;
    }

    void apply(Target& t) const {
        for (const auto& s : setters_) s(t);
    }

private:
    CLI::App* app_;
    std::vector<std::function<void(Target&)>> setters_;
};

void add_run_flags(Overrides<RunConfig>& o) {
    const RunConfig d;
    using C = RunConfig;
    o.add<double>("--lambda", "weight of the distance loss", fmt_double(d.lambda),
                  [](C& c, const double& v) { c.lambda = v; });
    o.add<double>("--alpha", "triplet inter-pair margin", fmt_double(d.alpha),
                  [](C& c, const double& v) { c.alpha = v; });
    o.add<double>("--beta", "triplet absolute positive-distance margin", fmt_double(d.beta),
                  [](C& c, const double& v) { c.beta = v; });
    o.add<std::size_t>("--n", "target samples per class", std::to_string(d.n),
                       [](C& c, const std::size_t& v) { c.n = v; });
    o.add<double>("--lr", "Adam learning rate", fmt_double(d.lr),
                  [](C& c, const double& v) { c.lr = v; });
    o.add<std::size_t>("--pretrain-iters", "pre-training epochs over the source set",
                       std::to_string(d.pretrain_iters),
                       [](C& c, const std::size_t& v) { c.pretrain_iters = v; });
    o.add<std::size_t>("--iters", "adaptation optimizer steps", std::to_string(d.adapt_iters),
                       [](C& c, const std::size_t& v) { c.adapt_iters = v; });
    o.add<std::size_t>("--batch-size", "pre-training minibatch size",
                       std::to_string(d.batch_size_pretrain),
                       [](C& c, const std::size_t& v) { c.batch_size_pretrain = v; });
    o.add<std::size_t>("--classes", "number of classes", std::to_string(d.num_classes),
                       [](C& c, const std::size_t& v) { c.num_classes = v; });
    o.add<std::vector<std::size_t>>("--hidden", "extractor hidden widths, comma separated",
                                    fmt_list(d.hidden_dims),
                                    [](C& c, const std::vector<std::size_t>& v) { c.hidden_dims = v; })
        ->delimiter(',');
    o.add<std::size_t>("--feature-dim", "extractor output width", std::to_string(d.feature_dim),
                       [](C& c, const std::size_t& v) { c.feature_dim = v; });
    o.add<std::uint64_t>("--seed", "run seed; FMDA_SEED is used when neither flag nor file sets it",
                         std::to_string(d.seed),
                         [](C& c, const std::uint64_t& v) { c.seed = v; });
    o.add<std::size_t>("--trials", "suite repetitions", std::to_string(d.trials),
                       [](C& c, const std::size_t& v) { c.trials = v; });
    o.add<std::string>("--method",
                       "without-target|dann|finetune|dann-tune|fmda-l2|fmda-triplet",
                       std::string(to_string(d.method)),
                       [](C& c, const std::string& v) { c.method = parse_method(v); });
    o.add<std::size_t>("--eval-every", "adaptation steps between held-out evaluations",
                       std::to_string(d.eval_every),
                       [](C& c, const std::size_t& v) { c.eval_every = v; });
    o.flag("--detach-source", "treat source features in the distance loss as constants",
           [](C& c, bool v) { c.detach_source = v; });
    o.flag("--fixed-pairs", "draw positives and negatives once per target sample",
           [](C& c, bool v) { c.fixed_pairs = v; });
    o.flag("--normalize-features", "unit-normalize features before distances",
           [](C& c, bool v) { c.normalize_features = v; });
    o.add<double>("--lambda-d", "gradient reversal coefficient", fmt_double(d.lambda_d),
                  [](C& c, const double& v) { c.lambda_d = v; });
    o.add<double>("--lambda-d-end", "reversal coefficient at the end of the ramp",
                  fmt_double(d.lambda_d_end), [](C& c, const double& v) { c.lambda_d_end = v; });
    o.add<std::size_t>("--lambda-d-horizon", "ramp length in steps, 0 for constant",
                       std::to_string(d.lambda_d_horizon),
                       [](C& c, const std::size_t& v) { c.lambda_d_horizon = v; });
    o.add<std::vector<std::size_t>>("--disc-hidden", "discriminator hidden widths",
                                    fmt_list(d.disc_hidden),
                                    [](C& c, const std::vector<std::size_t>& v) { c.disc_hidden = v; })
        ->delimiter(',');
}

void add_spec_flags(Overrides<ShiftSpec>& o, bool with_seed) {
    const ShiftSpec d = ShiftSpec::standard();
    using S = ShiftSpec;
    o.add<std::size_t>("--classes", "number of classes", std::to_string(d.num_classes),
                       [](S& s, const std::size_t& v) { s.num_classes = v; });
    o.add<std::size_t>("--dim", "input dimension", std::to_string(d.dim),
                       [](S& s, const std::size_t& v) { s.dim = v; });
    o.add<std::size_t>("--source-per-class", "source samples per class",
                       std::to_string(d.source_per_class),
                       [](S& s, const std::size_t& v) { s.source_per_class = v; });
    o.add<std::size_t>("--target-per-class", "target samples per class",
                       std::to_string(d.target_per_class),
                       [](S& s, const std::size_t& v) { s.target_per_class = v; });
    o.add<double>("--severity", "shift severity s >= 0", fmt_double(d.severity),
                  [](S& s, const double& v) { s.severity = v; })
        ->check(CLI::NonNegativeNumber);
    o.add<double>("--noise-scale", "within-class standard deviation", fmt_double(d.noise_scale),
                  [](S& s, const double& v) { s.noise_scale = v; });
    o.add<double>("--mean-scale", "standard deviation of class means", fmt_double(d.mean_scale),
                  [](S& s, const double& v) { s.mean_scale = v; });
    if (with_seed) {
        o.add<std::uint64_t>("--seed", "data seed", std::to_string(d.seed),
                             [](S& s, const std::uint64_t& v) { s.seed = v; });
    } else {
        o.add<std::uint64_t>("--data-seed", "data seed", std::to_string(d.seed),
                             [](S& s, const std::uint64_t& v) { s.seed = v; });
    }
}

ShiftSpec preset_spec(const std::string& name) {
    if (name == "standard") return ShiftSpec::standard();
    throw ConfigError("--preset: unknown preset '" + name + "' (available: standard)");
}

std::uint64_t env_seed(std::uint64_t fallback) {
    const char* raw = std::getenv("FMDA_SEED");
    if (raw == nullptr || *raw == '\0') return fallback;
    std::string_view text(raw);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw ConfigError("FMDA_SEED must be a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

/// defaults < FMDA_SEED < config file < flags.
RunConfig resolve_run(RunConfig base, const json* file, const Overrides<RunConfig>& flags) {
    base.seed = env_seed(base.seed);
    if (file != nullptr) base = run_config_from_json(*file, base);
    flags.apply(base);
    base.validate();
    return base;
}

json split_suite_file(json file, json& suite_section, json& data_section) {
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    if (file.contains("suite")) {
        suite_section = file["suite"];
        file.erase("suite");
    }
    if (file.contains("data")) {
        data_section = file["data"];
        file.erase("data");
    }
    return file;
}

LabeledDataset load_dataset(const std::string& path, Domain domain, std::size_t num_classes) {
    LabeledDataset d = load_csv(path, domain);
    if (d.domain != domain)
        throw ConfigError(path + ": expected " + std::string(to_string(domain)) + " rows");
    d.validate(num_classes);
    return d;
}

void require_architecture(const ModelParams& p, const RunConfig& c, const LabeledDataset& data) {
    if (p.input_dim != data.dim())
        throw ConfigError("checkpoint expects " + std::to_string(p.input_dim) +
                          " input features, data has " + std::to_string(data.dim()));
    if (p.num_classes() != c.num_classes)
        throw ConfigError("checkpoint has " + std::to_string(p.num_classes()) +
                          " classes, config has " + std::to_string(c.num_classes));
}

/// Architecture defaults follow the checkpoint so that downstream commands
/// need not repeat the pre-training flags.
RunConfig base_from_checkpoint(const Checkpoint& ckpt) {
    RunConfig c;
    c.hidden_dims = ckpt.config.hidden_dims;
    c.feature_dim = ckpt.config.feature_dim;
    c.num_classes = ckpt.config.num_classes;
    return c;
}

std::string curve_csv(const LearningCurve& curve) {
    std::string s = "step,macro_f1\n";
    char buf[64];
    for (const CurvePoint& p : curve) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", p.step, p.macro_f1);
        s += buf;
    }
    return s;
}

struct Context {
    std::ostream& out;
    std::ostream& err;
};

// ---- gen ------------------------------------------------------------------

struct GenCommand {
    std::string preset;
    std::string config;
    std::string out_dir;
    std::unique_ptr<Overrides<ShiftSpec>> flags;

    void attach(CLI::App& app) {
        app.add_option("--preset", preset, "named benchmark spec: standard");
        app.add_option("--config", config, "ShiftSpec JSON file");
        flags = std::make_unique<Overrides<ShiftSpec>>(&app);
        add_spec_flags(*flags, true);
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        ShiftSpec spec = preset.empty() ? ShiftSpec::standard() : preset_spec(preset);
        if (!config.empty()) spec = shift_spec_from_json(read_json(config), spec);
        flags->apply(spec);
        spec.validate();
        GeneratedPair pair = generate(spec);
        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        export_csv(pair.source, dir / "source.csv");
        export_csv(pair.target, dir / "target.csv");
        write_json(dir / "shift_spec.json", to_json(spec));
        ctx.out << "wrote " << pair.source.size() << " source and " << pair.target.size()
                << " target rows to " << dir.string() << "\n";
        return kExitOk;
    }
};

// ---- pretrain ---------------------------------------------------------------

struct PretrainCommand {
    std::string source;
    std::string target;
    std::string config;
    std::string out_dir;
    std::unique_ptr<Overrides<RunConfig>> flags;

    void attach(CLI::App& app) {
        app.add_option("--source", source, "source CSV")->required();
        app.add_option("--target", target, "unlabeled target pool CSV (method dann only)");
        app.add_option("--config", config, "RunConfig JSON file");
        flags = std::make_unique<Overrides<RunConfig>>(&app);
        add_run_flags(*flags);
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        json file;
        if (!config.empty()) file = read_json(config);
        RunConfig cfg = resolve_run({}, config.empty() ? nullptr : &file, *flags);
        LabeledDataset src = load_dataset(source, Domain::kSource, cfg.num_classes);

        Checkpoint ckpt;
        json extra = json::object();
        if (cfg.method == Method::kDann) {
            if (target.empty()) throw UsageError("pretrain --method dann requires --target");
            LabeledDataset tgt = load_dataset(target, Domain::kTarget, cfg.num_classes);
            DannResult r = train_dann(src, tgt, cfg);
            ckpt = std::move(r.checkpoint);
            extra["discriminator_accuracy"] = r.discriminator_accuracy;
        } else {
            ckpt = pretrain(src, cfg);
        }

        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        save_checkpoint(ckpt, dir / "model.ckpt");
        json resolved{{"command", "pretrain"}, {"run", to_json(cfg)}, {"source", source}};
        if (!target.empty()) resolved["target"] = target;
        write_json(dir / "resolved_config.json", resolved);
        if (!extra.empty()) write_json(dir / "dann_log.json", extra);

        EvalReport rep = evaluate(ckpt.params, src);
        ctx.out << "pretrained (" << to_string(cfg.method == Method::kDann ? Method::kDann
                                                                           : Method::kWithoutTarget)
                << ") source macro F1 " << fmt_double(100.0 * rep.macro_f1) << "\n";
        return kExitOk;
    }
};

// ---- adapt ------------------------------------------------------------------

struct AdaptCommand {
    std::string checkpoint;
    std::string source;
    std::string target;
    std::string split_path;
    std::string config;
    std::string out_dir;
    std::unique_ptr<Overrides<RunConfig>> flags;

    void attach(CLI::App& app) {
        app.add_option("--checkpoint", checkpoint, "pre-trained checkpoint")->required();
        app.add_option("--source", source, "source CSV")->required();
        app.add_option("--target", target, "labeled target pool CSV")->required();
        app.add_option("--split", split_path,
                       "few-shot split JSON; drawn from the run seed when absent");
        app.add_option("--config", config, "RunConfig JSON file");
        flags = std::make_unique<Overrides<RunConfig>>(&app);
        add_run_flags(*flags);
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        Checkpoint start = load_checkpoint(checkpoint);
        json file;
        if (!config.empty()) file = read_json(config);
        RunConfig cfg =
            resolve_run(base_from_checkpoint(start), config.empty() ? nullptr : &file, *flags);
        if (cfg.method == Method::kWithoutTarget || cfg.method == Method::kDann)
            throw UsageError("adapt: method " + std::string(to_string(cfg.method)) +
                             " does not adapt on target samples");

        LabeledDataset src = load_dataset(source, Domain::kSource, cfg.num_classes);
        LabeledDataset tgt = load_dataset(target, Domain::kTarget, cfg.num_classes);
        require_architecture(start.params, cfg, src);
        require_architecture(start.params, cfg, tgt);

        FewShotSplit split;
        if (split_path.empty()) {
            RngStream rng(cfg.seed, Stream::kFewShot);
            split = draw_fewshot(tgt, cfg.n, cfg.num_classes, rng);
        } else {
            split = fewshot_split_from_json(read_json(split_path));
            if (split.n != cfg.n)
                throw ConfigError("split has n=" + std::to_string(split.n) + " but config has n=" +
                                  std::to_string(cfg.n) + "; pass --n " +
                                  std::to_string(split.n));
        }
        check_split_disjoint(split, tgt);
        LabeledDataset few = tgt.subset_by_ids(split.train_ids);
        LabeledDataset test = tgt.subset_by_ids(split.test_ids);

        AdaptOptions opts;
        if (!test.empty()) opts.test = &test;
        AdaptResult r = cfg.method == Method::kDannTune
                            ? train_dann_tune(start, src, few, cfg, opts)
                            : adapt(start, src, few, cfg, opts);

        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        save_checkpoint(r.checkpoint, dir / "model.ckpt");
        write_text(dir / "curve.csv", curve_csv(r.curve));
        write_json(dir / "split.json", to_json(split));
        json resolved{{"command", "adapt"}, {"run", to_json(cfg)},      {"checkpoint", checkpoint},
                      {"source", source},   {"target", target}};
        if (!split_path.empty()) resolved["split"] = split_path;
        write_json(dir / "resolved_config.json", resolved);
        if (!test.empty()) {
            EvalReport rep = evaluate(r.checkpoint.params, test);
            rep.method = std::string(to_string(cfg.method));
            rep.n = cfg.n;
            rep.seed = cfg.seed;
            rep.iteration = r.checkpoint.iteration;
            write_json(dir / "report.json", to_json(rep));
            ctx.out << "adapted " << rep.method << " n=" << cfg.n << ": held-out macro F1 "
                    << fmt_double(100.0 * rep.macro_f1) << "\n";
        }
        return kExitOk;
    }
};

// ---- eval -------------------------------------------------------------------

struct EvalCommand {
    std::string checkpoint;
    std::string data;
    std::string split_path;
    std::string part = "test";
    std::string out_dir;

    void attach(CLI::App& app) {
        app.add_option("--checkpoint", checkpoint, "model checkpoint")->required();
        app.add_option("--data", data, "dataset CSV")->required();
        app.add_option("--split", split_path, "few-shot split JSON restricting the rows");
        app.add_option("--part", part, with_default("split part to score: train|test", "test"))
            ->check(CLI::IsMember({"train", "test"}));
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        Checkpoint ckpt = load_checkpoint(checkpoint);
        LabeledDataset d = load_csv(data);
        d.validate(ckpt.params.num_classes());
        if (!split_path.empty()) {
            FewShotSplit split = fewshot_split_from_json(read_json(split_path));
            check_split_disjoint(split, d);
            d = d.subset_by_ids(part == "train" ? split.train_ids : split.test_ids);
        }
        if (ckpt.params.input_dim != d.dim())
            throw ConfigError("checkpoint expects " + std::to_string(ckpt.params.input_dim) +
                              " input features, data has " + std::to_string(d.dim()));

        EvalReport rep = evaluate(ckpt.params, d);
        rep.method = std::string(to_string(ckpt.config.method));
        rep.n = ckpt.config.n;
        rep.seed = ckpt.config.seed;
        rep.iteration = ckpt.iteration;

        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        write_json(dir / "report.json", to_json(rep));
        json resolved{{"command", "eval"}, {"checkpoint", checkpoint}, {"data", data},
                      {"part", part}};
        if (!split_path.empty()) resolved["split"] = split_path;
        write_json(dir / "resolved_config.json", resolved);
        ctx.out << "macro F1 " << fmt_double(100.0 * rep.macro_f1) << " on " << rep.total()
                << " rows\n";
        return kExitOk;
    }
};

// ---- suite ------------------------------------------------------------------

struct SuiteCommand {
    std::string source;
    std::string target;
    std::string preset;
    std::string data_config;
    std::string config;
    std::vector<std::string> methods;
    std::vector<std::size_t> n_values;
    std::size_t jobs = 1;
    std::string out_dir;
    std::unique_ptr<Overrides<RunConfig>> flags;
    std::unique_ptr<Overrides<ShiftSpec>> spec_flags;

    void attach(CLI::App& app) {
        app.add_option("--source", source, "source CSV (with --target, instead of a preset)");
        app.add_option("--target", target, "target CSV");
        app.add_option("--preset", preset, with_default("generated benchmark", "standard"));
        app.add_option("--data-config", data_config, "ShiftSpec JSON for the generated benchmark");
        app.add_option("--config", config,
                       "RunConfig JSON; optional \"suite\" {methods, n_values} and \"data\" sections");
        app.add_option("--methods", methods, with_default("methods to compare", "all six"))
            ->delimiter(',');
        app.add_option("--n-values", n_values, with_default("few-shot sizes", "3,10"))
            ->delimiter(',');
        app.add_option("--jobs", jobs, with_default("concurrent trials", "1"))
            ->check(CLI::PositiveNumber);
        flags = std::make_unique<Overrides<RunConfig>>(&app);
        add_run_flags(*flags);
        spec_flags = std::make_unique<Overrides<ShiftSpec>>(&app);
        Overrides<ShiftSpec>& s = *spec_flags;
        s.add<double>("--severity", "shift severity of the generated benchmark",
                      fmt_double(ShiftSpec::standard().severity),
                      [](ShiftSpec& sp, const double& v) { sp.severity = v; })
            ->check(CLI::NonNegativeNumber);
        s.add<std::uint64_t>("--data-seed", "data seed of the generated benchmark",
                             std::to_string(ShiftSpec::standard().seed),
                             [](ShiftSpec& sp, const std::uint64_t& v) { sp.seed = v; });
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        json suite_section;
        json data_section;
        json run_section;
        if (!config.empty()) run_section = split_suite_file(read_json(config), suite_section, data_section);
        RunConfig cfg = resolve_run({}, config.empty() ? nullptr : &run_section, *flags);

        SuiteOptions opts;
        opts.base = cfg;
        opts.trials = cfg.trials;
        opts.jobs = jobs;
        if (!suite_section.is_null()) {
            if (!suite_section.is_object()) throw ConfigError("config: \"suite\" must be an object");
            for (const auto& [key, value] : suite_section.items()) {
                if (key == "methods") {
                    opts.methods.clear();
                    for (const auto& m : value) opts.methods.push_back(parse_method(m.get<std::string>()));
                } else if (key == "n_values") {
                    opts.n_values = value.get<std::vector<std::size_t>>();
                } else {
                    throw ConfigError("config: unknown key 'suite." + key + "'");
                }
            }
        }
        if (!methods.empty()) {
            opts.methods.clear();
            for (const auto& m : methods) opts.methods.push_back(parse_method(m));
        }
        if (!n_values.empty()) opts.n_values = n_values;

        const bool from_files = !source.empty() || !target.empty();
        SuiteReport report;
        json resolved{{"command", "suite"}, {"run", to_json(cfg)}, {"jobs", jobs}};
        json method_names = json::array();
        for (Method m : opts.methods) method_names.push_back(std::string(to_string(m)));
        resolved["methods"] = method_names;
        resolved["n_values"] = opts.n_values;
        if (from_files) {
            if (source.empty() || target.empty())
                throw UsageError("suite: --source and --target must be given together");
            if (!preset.empty() || !data_config.empty() || !data_section.is_null())
                throw UsageError("suite: dataset files and a generated benchmark are exclusive");
            LabeledDataset src = load_dataset(source, Domain::kSource, cfg.num_classes);
            LabeledDataset tgt = load_dataset(target, Domain::kTarget, cfg.num_classes);
            resolved["source"] = source;
            resolved["target"] = target;
            report = run_suite(src, tgt, opts);
        } else {
            ShiftSpec spec = preset.empty() ? ShiftSpec::standard() : preset_spec(preset);
            if (!data_section.is_null()) spec = shift_spec_from_json(data_section, spec);
            if (!data_config.empty()) spec = shift_spec_from_json(read_json(data_config), spec);
            spec_flags->apply(spec);
            spec.validate();
            if (spec.num_classes != cfg.num_classes)
                throw ConfigError("benchmark has " + std::to_string(spec.num_classes) +
                                  " classes but --classes is " + std::to_string(cfg.num_classes));
            resolved["data"] = to_json(spec);
            report = run_suite(generate(spec), opts);
        }

        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        write_json(dir / "suite_report.json", to_json(report));
        write_text(dir / "curves.csv", curves_csv(report));
        write_json(dir / "resolved_config.json", resolved);

        for (const std::string& w : report.warnings) ctx.err << "warning: " << w << "\n";
        char line[160];
        ctx.out << "method          n   final (mean +- sd)   best    gap\n";
        for (const MethodSummary& e : report.entries) {
            std::snprintf(line, sizeof line, "%-15s %-3zu %7.2f +- %-6.2f %7.2f %6.2f\n",
                          std::string(to_string(e.method)).c_str(), e.n, e.mean_final, e.sd_final,
                          e.mean_best, e.mean_gap);
            ctx.out << line;
        }
        return kExitOk;
    }
};

// ---- export-features ----------------------------------------------------------

struct ExportCommand {
    std::string checkpoint;
    std::string source;
    std::string target;
    std::string split_path;
    std::string out_dir;

    void attach(CLI::App& app) {
        app.add_option("--checkpoint", checkpoint, "model checkpoint")->required();
        app.add_option("--source", source, "source CSV");
        app.add_option("--target", target, "target CSV");
        app.add_option("--split", split_path, "few-shot split JSON tagging target rows");
        app.add_option("--out", out_dir, "output directory")->required();
    }

    int run(Context& ctx) const {
        if (source.empty() && target.empty())
            throw UsageError("export-features: give --source and/or --target");
        Checkpoint ckpt = load_checkpoint(checkpoint);
        const std::size_t c = ckpt.params.num_classes();
        std::vector<LabeledDataset> store;
        std::vector<std::string> names;
        store.reserve(3);
        if (!source.empty()) {
            store.push_back(load_dataset(source, Domain::kSource, c));
            names.push_back("source");
        }
        if (!target.empty()) {
            LabeledDataset tgt = load_dataset(target, Domain::kTarget, c);
            if (!split_path.empty()) {
                FewShotSplit split = fewshot_split_from_json(read_json(split_path));
                check_split_disjoint(split, tgt);
                store.push_back(tgt.subset_by_ids(split.train_ids));
                names.push_back("fewshot");
                store.push_back(tgt.subset_by_ids(split.test_ids));
                names.push_back("test");
            } else {
                store.push_back(std::move(tgt));
                names.push_back("target");
            }
        }
        std::vector<FeatureExportSet> sets;
        for (std::size_t i = 0; i < store.size(); ++i) {
            if (store[i].dim() != ckpt.params.input_dim)
                throw ConfigError(names[i] + " data has " + std::to_string(store[i].dim()) +
                                  " features, checkpoint expects " +
                                  std::to_string(ckpt.params.input_dim));
            sets.push_back({&store[i], names[i]});
        }

        ensure_dir(out_dir);
        const fs::path dir(out_dir);
        export_features(ckpt.params, sets, dir / "features.csv");
        json resolved{{"command", "export-features"}, {"checkpoint", checkpoint}};
        if (!source.empty()) resolved["source"] = source;
        if (!target.empty()) resolved["target"] = target;
        if (!split_path.empty()) resolved["split"] = split_path;
        write_json(dir / "resolved_config.json", resolved);
        std::size_t rows = 0;
        for (const auto& d : store) rows += d.size();
        ctx.out << "wrote features for " << rows << " rows\n";
        return kExitOk;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Few-shot metric domain adaptation toolkit", "fmda"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    GenCommand gen;
    PretrainCommand pre;
    AdaptCommand ada;
    EvalCommand ev;
    SuiteCommand suite;
    ExportCommand exp;
    CLI::App* gen_app = app.add_subcommand("gen", "generate a synthetic source/target benchmark");
    CLI::App* pre_app = app.add_subcommand("pretrain", "train on labeled source data");
    CLI::App* ada_app = app.add_subcommand("adapt", "adapt a checkpoint with few-shot target data");
    CLI::App* ev_app = app.add_subcommand("eval", "score a checkpoint on a dataset");
    CLI::App* suite_app = app.add_subcommand("suite", "run the multi-seed method comparison");
    CLI::App* exp_app = app.add_subcommand("export-features", "write features and a 2-D projection");
    gen.attach(*gen_app);
    pre.attach(*pre_app);
    ada.attach(*ada_app);
    ev.attach(*ev_app);
    suite.attach(*suite_app);
    exp.attach(*exp_app);

    Context ctx{out, err};
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (gen_app->parsed()) return gen.run(ctx);
        if (pre_app->parsed()) return pre.run(ctx);
        if (ada_app->parsed()) return ada.run(ctx);
        if (ev_app->parsed()) return ev.run(ctx);
        if (suite_app->parsed()) return suite.run(ctx);
        if (exp_app->parsed()) return exp.run(ctx);
        return kExitConfig;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace fmda::cli
