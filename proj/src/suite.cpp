#include "fmda/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <unordered_set>

#include "fmda/dann.hpp"
#include "fmda/errors.hpp"
#include "fmda/metrics.hpp"
#include "fmda/pca.hpp"
#include "fmda/rng.hpp"
#include "fmda/sampling.hpp"

namespace fmda {

double degradation_gap(std::span<const double> curve) {
    if (curve.empty()) throw UsageError("degradation_gap: empty curve");
    return *std::max_element(curve.begin(), curve.end()) - curve.back();
}

double degradation_gap(const LearningCurve& curve) {
    std::vector<double> values;
    values.reserve(curve.size());
    for (const CurvePoint& p : curve) values.push_back(p.macro_f1);
    return degradation_gap(values);
}

const MethodSummary* SuiteReport::find(Method m, std::size_t n) const {
    for (const MethodSummary& e : entries) {
        if (e.method == m && e.n == n) return &e;
    }
    return nullptr;
}

namespace {

struct Key {
    std::size_t n;
    Method method;
    auto operator<=>(const Key&) const = default;
};

struct TrialOutput {
    std::map<Key, TrialRecord> records;
    std::vector<std::string> warnings;
    std::size_t leakage_checks = 0;
};

TrialRecord score_static(const ModelParams& params, const LabeledDataset& test, std::size_t trial,
                         std::uint64_t seed) {
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = seed;
    rec.final_f1 = 100.0 * evaluate(params, test).macro_f1;
    rec.best_f1 = rec.final_f1;
    rec.curve.push_back({0, rec.final_f1});
    rec.test_size = test.size();
    return rec;
}

TrialRecord score_adapted(const AdaptResult& r, const LabeledDataset& test, std::size_t trial,
                          std::uint64_t seed, std::size_t fewshot_size) {
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = seed;
    rec.curve = r.curve;
    rec.final_f1 = 100.0 * evaluate(r.checkpoint.params, test).macro_f1;
    if (rec.curve.empty() || rec.curve.back().step != r.checkpoint.iteration) {
        rec.curve.push_back({static_cast<std::size_t>(r.checkpoint.iteration), rec.final_f1});
    }
    rec.best_f1 = rec.curve.front().macro_f1;
    rec.best_iter = rec.curve.front().step;
    for (const CurvePoint& p : rec.curve) {
        if (p.macro_f1 > rec.best_f1) {
            rec.best_f1 = p.macro_f1;
            rec.best_iter = p.step;
        }
    }
    rec.gap = degradation_gap(rec.curve);
    rec.fewshot_size = fewshot_size;
    rec.test_size = test.size();
    return rec;
}

void assert_no_leakage(const FewShotSplit& split, const LabeledDataset& fewshot,
                       const LabeledDataset& test, const LabeledDataset& target) {
    check_split_disjoint(split, target);
    std::unordered_set<std::uint64_t> train(fewshot.ids.begin(), fewshot.ids.end());
    for (std::uint64_t id : test.ids) {
        if (train.count(id) != 0) {
            throw UsageError("leakage guard: target id " + std::to_string(id) +
                             " is both a few-shot training sample and an evaluation sample");
        }
    }
}

TrialOutput run_trial(const LabeledDataset& source, const LabeledDataset& target,
                      const SuiteOptions& options, const std::vector<Method>& methods,
                      const std::vector<std::size_t>& n_values, std::size_t trial) {
    TrialOutput out;
    RunConfig cfg = options.base;
    cfg.seed = options.base.seed + trial;

    const bool need_dann = std::find(methods.begin(), methods.end(), Method::kDann) != methods.end();
    const bool need_pretrain = std::any_of(methods.begin(), methods.end(),
                                           [](Method m) { return m != Method::kDann; });
    std::optional<Checkpoint> pre;
    if (need_pretrain) pre = pretrain(source, cfg);
    std::optional<Checkpoint> dann;
    if (need_dann) {
        LabeledDataset unlabeled = target;  // labels are never read by train_dann
        dann = train_dann(source, unlabeled, cfg).checkpoint;
    }

    for (std::size_t n : n_values) {
        RngStream split_rng(cfg.seed, Stream::kFewShot);
        const FewShotSplit split = draw_fewshot(target, n, cfg.num_classes, split_rng);
        const LabeledDataset fewshot = target.subset_by_ids(split.train_ids);
        const LabeledDataset test = target.subset_by_ids(split.test_ids);
        assert_no_leakage(split, fewshot, test, target);
        ++out.leakage_checks;

        for (Method m : methods) {
            TrialRecord rec;
            if (m == Method::kWithoutTarget) {
                rec = score_static(pre->params, test, trial, cfg.seed);
            } else if (m == Method::kDann) {
                rec = score_static(dann->params, test, trial, cfg.seed);
            } else {
                RunConfig mc = cfg;
                mc.n = n;
                mc.method = m;
                AdaptOptions ao;
                ao.test = &test;
                const AdaptResult r = m == Method::kDannTune
                                          ? train_dann_tune(*pre, source, fewshot, mc, ao)
                                          : adapt(*pre, source, fewshot, mc, ao);
                rec = score_adapted(r, test, trial, cfg.seed, fewshot.size());
            }
            out.records.emplace(Key{n, m}, std::move(rec));
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

SuiteReport run_suite(const LabeledDataset& source, const LabeledDataset& target,
                      const SuiteOptions& options) {
    options.base.validate();
    if (options.trials < 1) throw ConfigError("run_suite: trials must be >= 1");
    const std::size_t classes = options.base.num_classes;
    source.validate(classes);
    target.validate(classes);
    if (source.dim() != target.dim()) throw ConfigError("run_suite: source/target dims differ");

    SuiteReport report;
    report.base = options.base;
    report.trials = options.trials;

    std::vector<Method> methods;
    for (Method m : options.methods) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
            methods.push_back(m);
        } else {
            report.warnings.push_back("duplicate method '" + std::string(to_string(m)) + "' ignored");
        }
    }
    const ClassIndex target_index(target, classes);
    std::size_t smallest = target.size();
    for (std::size_t c = 0; c < classes; ++c) smallest = std::min(smallest, target_index.of(c).size());
    for (std::size_t n : options.n_values) {
        if (n == 0) {
            report.warnings.push_back("n=0 skipped: few-shot methods need at least one sample per class");
        } else if (n >= smallest) {
            report.warnings.push_back("n=" + std::to_string(n) +
                                      " skipped: leaves no held-out target samples for some class");
        } else if (std::find(report.n_values.begin(), report.n_values.end(), n) == report.n_values.end()) {
            report.n_values.push_back(n);
        }
    }
    if (report.n_values.empty()) throw ConfigError("run_suite: no usable n values");

    std::vector<TrialOutput> outputs(options.trials);
    const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
    for (std::size_t first = 0; first < options.trials; first += jobs) {
        std::vector<std::future<TrialOutput>> running;
        const std::size_t last = std::min(options.trials, first + jobs);
        for (std::size_t t = first; t < last; ++t) {
            running.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                         run_trial, std::cref(source), std::cref(target),
                                         std::cref(options), std::cref(methods),
                                         std::cref(report.n_values), t));
        }
        for (std::size_t t = first; t < last; ++t) outputs[t] = running[t - first].get();
    }

    for (std::size_t n : report.n_values) {
        for (Method m : methods) {
            MethodSummary s;
            s.method = m;
            s.n = n;
            std::vector<double> finals, bests, iters, gaps;
            for (TrialOutput& out : outputs) {
                TrialRecord& rec = out.records.at(Key{n, m});
                finals.push_back(rec.final_f1);
                bests.push_back(rec.best_f1);
                iters.push_back(static_cast<double>(rec.best_iter));
                gaps.push_back(rec.gap);
                s.trials.push_back(std::move(rec));
            }
            s.mean_final = mean_of(finals);
            s.sd_final = sample_sd(finals);
            s.mean_best = mean_of(bests);
            s.sd_best = sample_sd(bests);
            s.mean_best_iter = mean_of(iters);
            s.mean_gap = mean_of(gaps);
            report.entries.push_back(std::move(s));
        }
    }
    for (const TrialOutput& out : outputs) report.leakage_checks += out.leakage_checks;

    if (std::find(methods.begin(), methods.end(), Method::kDannTune) != methods.end()) {
        std::ostringstream note;
        note << "dann-tune objective: cross-entropy on target anchors plus domain-adversarial loss "
                "between source positives and target anchors through gradient reversal (lambda_d="
             << options.base.lambda_d << ", discriminator hidden=" << nlohmann::json(options.base.disc_hidden).dump()
             << ")";
        report.notes.push_back(note.str());
    }
    if (std::find(methods.begin(), methods.end(), Method::kWithoutTarget) != methods.end() ||
        std::find(methods.begin(), methods.end(), Method::kDann) != methods.end()) {
        report.notes.push_back(
            "without-target and dann ignore target labels; their rows for each n are scores on that "
            "n's held-out split");
    }
    return report;
}

SuiteReport run_suite(const GeneratedPair& pair, const SuiteOptions& options) {
    SuiteReport r = run_suite(pair.source, pair.target, options);
    r.spec = pair.spec;
    return r;
}

nlohmann::json to_json(const SuiteReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const MethodSummary& s : report.entries) {
        nlohmann::json trials = nlohmann::json::array();
        for (const TrialRecord& t : s.trials) {
            nlohmann::json curve = nlohmann::json::array();
            for (const CurvePoint& p : t.curve) curve.push_back({p.step, p.macro_f1});
            trials.push_back({{"trial", t.trial},
                              {"seed", t.seed},
                              {"final_macro_f1", t.final_f1},
                              {"best_macro_f1", t.best_f1},
                              {"best_iter", t.best_iter},
                              {"degradation_gap", t.gap},
                              {"fewshot_size", t.fewshot_size},
                              {"test_size", t.test_size},
                              {"curve", curve}});
        }
        entries.push_back({{"method", std::string(to_string(s.method))},
                           {"n", s.n},
                           {"mean_final_macro_f1", s.mean_final},
                           {"sd_final_macro_f1", s.sd_final},
                           {"mean_best_macro_f1", s.mean_best},
                           {"sd_best_macro_f1", s.sd_best},
                           {"mean_best_iter", s.mean_best_iter},
                           {"mean_degradation_gap", s.mean_gap},
                           {"trials", trials}});
    }
    nlohmann::json j = {{"config", to_json(report.base)},
                        {"n_values", report.n_values},
                        {"trials", report.trials},
                        {"entries", entries},
                        {"warnings", report.warnings},
                        {"notes", report.notes},
                        {"leakage_checks", report.leakage_checks}};
    if (report.spec) j["shift_spec"] = to_json(*report.spec);
    return j;
}

std::string curves_csv(const SuiteReport& report) {
    std::ostringstream out;
    out << "method,n,trial,iter,macro_f1\n";
    char buf[32];
    for (const MethodSummary& s : report.entries) {
        for (const TrialRecord& t : s.trials) {
            for (const CurvePoint& p : t.curve) {
                std::snprintf(buf, sizeof(buf), "%.17g", p.macro_f1);
                out << to_string(s.method) << ',' << s.n << ',' << t.trial << ',' << p.step << ','
                    << buf << '\n';
            }
        }
    }
    return out.str();
}

void export_features(const ModelParams& params, std::span<const FeatureExportSet> sets,
                     const std::filesystem::path& path) {
    std::vector<Matrix> features;
    std::size_t total = 0;
    for (const FeatureExportSet& s : sets) {
        if (s.data == nullptr) throw UsageError("export_features: null dataset");
        if (s.data->dim() != params.input_dim) {
            throw ConfigError("export_features: dataset dim " + std::to_string(s.data->dim()) +
                              " does not match model input dim " + std::to_string(params.input_dim));
        }
        features.push_back(forward(params, s.data->features).features);
        total += s.data->size();
    }
    const std::size_t k = params.feature_dim();
    Matrix all(total, k);
    std::size_t at = 0;
    for (const Matrix& f : features) {
        std::copy(f.values().begin(), f.values().end(), all.values().begin() + static_cast<std::ptrdiff_t>(at));
        at += f.size();
    }
    Matrix projected(total, 2);
    if (total > 0) {
        const Pca pca = fit_pca(all, std::min<std::size_t>(2, k));
        const Matrix p = pca.project(all);
        for (std::size_t r = 0; r < total; ++r)
            for (std::size_t c = 0; c < p.cols(); ++c) projected(r, c) = p(r, c);
    }

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "id,domain,label,split";
    for (std::size_t c = 0; c < k; ++c) out << ",f_" << c;
    out << ",pc1,pc2\n";
    char buf[32];
    std::size_t row = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const LabeledDataset& d = *sets[i].data;
        for (std::size_t r = 0; r < d.size(); ++r, ++row) {
            out << d.ids[r] << ',' << to_string(d.domain) << ',' << d.labels[r] << ',' << sets[i].split;
            for (double v : features[i].row(r)) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << ',' << buf;
            }
            for (std::size_t c = 0; c < 2; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", projected(row, c));
                out << ',' << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace fmda
