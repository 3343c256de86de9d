// Acceptance run: one PASS/FAIL line per criterion, supplementary numbers
// below. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fmda/adam.hpp"
#include "fmda/dann.hpp"
#include "fmda/datagen.hpp"
#include "fmda/losses.hpp"
#include "fmda/metrics.hpp"
#include "fmda/pca.hpp"
#include "fmda/suite.hpp"
#include "oracles.hpp"

using namespace fmda;
using namespace fmda::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criteria {
    int failed = 0;
    void report(int id, const std::string& name, bool ok, const std::string& detail) {
        std::printf("%s  [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---- 1 ----------------------------------------------------------------------

void gradient_correctness(Criteria& c) {
    const auto t0 = Clock::now();
    const GradCase cases[] = {GradCase::kCrossEntropy, GradCase::kL2, GradCase::kTriplet,
                              GradCase::kCombinedL2, GradCase::kCombinedTriplet, GradCase::kDannTune};
    bool ok = true;
    std::string detail;
    for (GradCase g : cases) {
        const GradCaseReport r = run_grad_case(g, 20, 2024);
        ok &= r.instances == 20 && r.stats.entries > 0 && r.stats.max_rel_error < 1e-5;
        detail += std::string(to_string(g)) + " " + fmt("%.1e", r.stats.max_rel_error) + ", ";
    }
    const double secs = seconds_since(t0);
    ok &= secs < 10.0;
    c.report(1, "gradient correctness", ok, detail + "runtime " + fmt("%.2f s", secs) + " (< 1e-5, < 10 s)");
}

// ---- 2 ----------------------------------------------------------------------

void loss_identities(Criteria& c) {
    RngStream rng(2, 1);
    bool ok = true;
    double worst_ce = 0.0, worst_add = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Matrix a = random_matrix(6, 4, rng);
        ok &= l2_distance_loss(a, a).value == 0.0;

        // d_p = 0, d_n >= alpha.
        const double alpha = rng.uniform(0.1, 2.0), beta = rng.uniform(0.0, 0.6);
        Matrix n = a;
        for (std::size_t r = 0; r < n.rows(); ++r) n(r, 0) += alpha * (1.0 + rng.uniform());
        ok &= triplet_plus_loss(a, a, n, alpha, beta).value == 0.0;

        const std::size_t classes = 2 + rng.uniform_index(9);
        Matrix probs(3, classes);
        probs.fill(1.0 / static_cast<double>(classes));
        const std::vector<int> y{0, 1, static_cast<int>(classes - 1)};
        worst_ce = std::max(worst_ce, std::fabs(cross_entropy(probs, y).value -
                                                 std::log(static_cast<double>(classes))));

        LossOptions opts;
        opts.lambda = rng.uniform(0.0, 3.0);
        const Matrix p = random_matrix(3, 4, rng), f = random_matrix(3, 4, rng), g = random_matrix(3, 4, rng);
        for (Method m : {Method::kFinetune, Method::kFmdaL2, Method::kFmdaTriplet}) {
            const LossValue v = combined_loss(probs, y, f, p, g, m, opts).value;
            worst_add = std::max(worst_add, std::fabs(v.total - (v.classification + opts.lambda * v.distance)));
        }
    }
    ok &= worst_ce <= 1e-12 && worst_add <= 1e-12;
    c.report(2, "loss identities", ok,
             "L2(f,f)=0, triplet(d_p=0,d_n>=alpha)=0, |CE(uniform)-ln C| " + fmt("%.1e", worst_ce) +
                 ", additivity error " + fmt("%.1e", worst_add) + " (<= 1e-12)");
}

// ---- 3 ----------------------------------------------------------------------

std::vector<ModelParams> trajectory(const Checkpoint& start, const LabeledDataset& source,
                                    const LabeledDataset& fewshot, const RunConfig& cfg, bool dann_tune) {
    std::vector<ModelParams> traj;
    AdaptOptions o;
    o.on_step = [&](std::size_t, const ModelParams& p, const LossValue&) { traj.push_back(p); };
    if (dann_tune) {
        train_dann_tune(start, source, fewshot, cfg, o);
    } else {
        adapt(start, source, fewshot, cfg, o);
    }
    return traj;
}

void degeneracies(Criteria& c, const GeneratedPair& data) {
    RunConfig cfg;
    cfg.n = 3;
    const Checkpoint pre = pretrain(data.source, cfg);
    RngStream split_rng(cfg.seed, Stream::kFewShot);
    const FewShotSplit split = draw_fewshot(data.target, cfg.n, cfg.num_classes, split_rng);
    const LabeledDataset fewshot = data.target.subset_by_ids(split.train_ids);

    RunConfig ft = cfg;
    ft.method = Method::kFinetune;
    RunConfig l2 = cfg;
    l2.method = Method::kFmdaL2;
    l2.lambda = 0.0;
    RunConfig tune = cfg;
    tune.method = Method::kDannTune;
    tune.lambda_d = tune.lambda_d_end = 0.0;
    RunConfig dann0 = cfg;
    dann0.lambda_d = dann0.lambda_d_end = 0.0;

    const auto base = trajectory(pre, data.source, fewshot, ft, false);
    const bool a = base.size() == cfg.adapt_iters && base == trajectory(pre, data.source, fewshot, l2, false);
    const bool b1 = base == trajectory(pre, data.source, fewshot, tune, true);
    const bool b2 = train_dann(data.source, data.target, dann0).checkpoint.params == pre.params;
    c.report(3, "degeneracy equivalences", a && b1 && b2,
             std::string("fmda-l2(lambda=0)==finetune ") + (a ? "yes" : "no") +
                 ", dann-tune(lambda_d=0)==finetune " + (b1 ? "yes" : "no") +
                 ", dann(lambda_d=0)==pretrain " + (b2 ? "yes" : "no") + " (bit-identical, 1000 steps)");
}

// ---- 4 ----------------------------------------------------------------------

double brute_macro_f1(const std::vector<int>& pred, const std::vector<int>& truth, int classes) {
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            tp += pred[i] == k && truth[i] == k;
            fp += pred[i] == k && truth[i] != k;
            fn += pred[i] != k && truth[i] == k;
        }
        if (tp > 0) sum += 2 * tp / (2 * tp + fp + fn);
    }
    return sum / classes;
}

void oracle_equivalences(Criteria& c) {
    RngStream rng(4, 1);
    int f1_match = 0;
    for (int t = 0; t < 100; ++t) {
        const int classes = 2 + static_cast<int>(rng.uniform_index(6));
        const std::size_t n = 1 + rng.uniform_index(80);
        std::vector<int> pred(n), truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(classes)));
            pred[i] = rng.uniform() < 0.6 ? truth[i]
                                          : static_cast<int>(rng.uniform_index(static_cast<std::size_t>(classes)));
        }
        f1_match += macro_f1(pred, truth, static_cast<std::size_t>(classes)).macro_f1 ==
                    brute_macro_f1(pred, truth, classes);
    }

    Matrix w(1, 1), g(1, 1);
    g(0, 0) = 1.0;
    std::array<Matrix*, 1> ps{&w};
    std::array<const Matrix*, 1> gs{&g};
    AdamState st = AdamState::for_tensors(std::array<const Matrix*, 1>{&w});
    adam_step(ps, gs, st, 1e-3);
    const double adam_err = std::fabs(w(0, 0) + 1e-3);

    int pca_ok = 0;
    for (int t = 0; t < 20; ++t) {
        Matrix x = random_matrix(100, 32, rng);
        for (std::size_t r = 0; r < 100; ++r)
            for (std::size_t k = 0; k < 32; ++k) x(r, k) *= rng.uniform(0.5, 1.5) + 0.05 * static_cast<double>(k);
        const Pca p = fit_pca(x, 4);
        const Matrix y = p.project(x);
        std::vector<double> var(4, 0.0);
        for (std::size_t k = 0; k < 4; ++k) {
            double m = 0.0;
            for (std::size_t r = 0; r < 100; ++r) m += y(r, k) / 100.0;
            for (std::size_t r = 0; r < 100; ++r) var[k] += (y(r, k) - m) * (y(r, k) - m);
        }
        pca_ok += var[0] >= var[1] && var[1] >= var[2] && var[2] >= var[3];
    }
    c.report(4, "oracle equivalences", f1_match == 100 && adam_err <= 1e-9 && pca_ok == 20,
             "macro F1 exact " + std::to_string(f1_match) + "/100, first Adam step error " +
                 fmt("%.1e", adam_err) + " (<= 1e-9), PCA order " + std::to_string(pca_ok) + "/20");
}

// ---- 5 to 8 -----------------------------------------------------------------

void print_table(const SuiteReport& r) {
    std::printf("\n%-15s %3s %16s %16s %10s %8s\n", "method", "n", "final F1", "best F1", "best iter", "gap");
    for (const MethodSummary& s : r.entries) {
        std::printf("%-15s %3zu %8.2f +- %5.2f %8.2f +- %5.2f %10.0f %8.2f\n",
                    std::string(to_string(s.method)).c_str(), s.n, s.mean_final, s.sd_final, s.mean_best,
                    s.sd_best, s.mean_best_iter, s.mean_gap);
    }
    std::printf("\n");
}

void suite_criteria(Criteria& c, const GeneratedPair& data) {
    SuiteOptions opts;
    opts.trials = 5;
    opts.jobs = 1;
    const auto t0 = Clock::now();
    const SuiteReport r = run_suite(data, opts);
    const double secs = seconds_since(t0);
    print_table(r);

    auto mean = [&](Method m, std::size_t n) { return r.find(m, n)->mean_final; };
    bool ok5 = secs < 600.0;
    std::string d5;
    for (std::size_t n : {std::size_t{3}, std::size_t{10}}) {
        const double wo = mean(Method::kWithoutTarget, n), ft = mean(Method::kFinetune, n),
                     l2 = mean(Method::kFmdaL2, n), tr = mean(Method::kFmdaTriplet, n);
        const bool a = tr >= l2 - 1.0, b = l2 >= ft + 1.0, e = ft >= wo + 10.0;
        ok5 &= a && b && e;
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "n=%zu: triplet %.2f >= l2-1 %s; l2 %.2f >= finetune+1 (%.2f) %s; finetune >= w/o+10 "
                      "(%.2f) %s. ",
                      n, tr, a ? "ok" : "NO", l2, ft + 1.0, b ? "ok" : "NO", wo + 10.0, e ? "ok" : "NO");
        d5 += buf;
    }
    bool more_data = true;
    for (Method m : {Method::kFinetune, Method::kDannTune, Method::kFmdaL2, Method::kFmdaTriplet})
        more_data &= mean(m, 10) >= mean(m, 3);
    ok5 &= more_data;
    d5 += std::string("n10 >= n3 for adapted methods ") + (more_data ? "ok" : "NO") + ". runtime " +
          fmt("%.1f s", secs) + " (< 600 s)";
    c.report(5, "benchmark trend", ok5, d5);

    const double gap_ft = r.find(Method::kFinetune, 3)->mean_gap;
    const double gap_tr = r.find(Method::kFmdaTriplet, 3)->mean_gap;
    c.report(6, "overfitting-gap trend", gap_ft > gap_tr,
             "n=3 mean gap finetune " + fmt("%.2f", gap_ft) + " > fmda-triplet " + fmt("%.2f", gap_tr));

    const std::size_t expected = opts.trials * opts.n_values.size();
    const bool ok7 = r.leakage_checks == expected && r.warnings.empty();
    c.report(7, "leakage guard", ok7,
             std::to_string(r.leakage_checks) + "/" + std::to_string(expected) +
                 " trial splits asserted disjoint, " + std::to_string(r.warnings.size()) + " warnings");

    const std::string first = to_json(r).dump(2);
    const std::string second = to_json(run_suite(data, opts)).dump(2);
    c.report(8, "reproducibility", first == second,
             "two suite runs " + std::string(first == second ? "byte-identical" : "differ") + " (" +
                 std::to_string(first.size()) + " bytes)");

    for (const std::string& note : r.notes) std::printf("note: %s\n", note.c_str());
}

}  // namespace

int main() {
    Criteria c;
    const GeneratedPair data = generate(ShiftSpec::standard());
    gradient_correctness(c);
    loss_identities(c);
    degeneracies(c, data);
    oracle_equivalences(c);
    suite_criteria(c, data);
    std::printf("\n%d criteria failed\n", c.failed);
    return c.failed == 0 ? 0 : 1;
}
