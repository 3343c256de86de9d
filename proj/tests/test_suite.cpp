#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fmda/errors.hpp"
#include "fmda/pca.hpp"
#include "fmda/suite.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace fmda;

namespace {

GeneratedPair small_pair() {
    ShiftSpec s;
    s.num_classes = 3;
    s.dim = 5;
    s.source_per_class = 40;
    s.target_per_class = 20;
    s.severity = 1.5;
    s.seed = 12;
    return generate(s);
}

SuiteOptions small_options() {
    SuiteOptions o;
    o.base.num_classes = 3;
    o.base.hidden_dims = {10};
    o.base.feature_dim = 4;
    o.base.pretrain_iters = 3;
    o.base.adapt_iters = 30;
    o.base.batch_size_pretrain = 32;
    o.base.disc_hidden = {6};
    o.base.seed = 40;
    o.trials = 3;
    o.n_values = {2, 5};
    return o;
}

}  // namespace

TEST_CASE("degradation gap") {
    CHECK(degradation_gap(std::vector<double>{60, 70, 65}) == 5.0);
    CHECK(degradation_gap(std::vector<double>{1, 2, 3, 3}) == 0.0);
    CHECK(degradation_gap(std::vector<double>{4}) == 0.0);
    CHECK_THROWS_AS(degradation_gap(std::vector<double>{}), UsageError);
    const LearningCurve c{{10, 50}, {20, 80}, {30, 72}};
    CHECK(degradation_gap(c) == 8.0);
}

TEST_CASE("without-target only suite") {
    const GeneratedPair p = small_pair();
    SuiteOptions o = small_options();
    o.methods = {Method::kWithoutTarget};
    o.trials = 5;
    const SuiteReport r = run_suite(p, o);
    REQUIRE(r.entries.size() == 2);
    const MethodSummary* s = r.find(Method::kWithoutTarget, 2);
    REQUIRE(s != nullptr);
    CHECK(s->trials.size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
        CHECK(s->trials[t].seed == 40 + t);
        REQUIRE(s->trials[t].curve.size() == 1);
        CHECK(s->trials[t].curve[0].step == 0);
        CHECK(s->trials[t].curve[0].macro_f1 == s->trials[t].final_f1);
        CHECK(s->trials[t].gap == 0.0);
    }
    CHECK(s->sd_final > 0.0);
    CHECK(r.find(Method::kFinetune, 2) == nullptr);
    CHECK(r.leakage_checks == 10);
}

TEST_CASE("full grid bookkeeping") {
    const GeneratedPair p = small_pair();
    const SuiteOptions o = small_options();
    const SuiteReport r = run_suite(p, o);
    CHECK(r.entries.size() == 12);
    CHECK(r.leakage_checks == o.trials * 2);
    CHECK(r.warnings.empty());
    for (const MethodSummary& s : r.entries) {
        CHECK(s.trials.size() == 3);
        double mean = 0.0;
        for (const TrialRecord& t : s.trials) {
            mean += t.final_f1 / 3.0;
            CHECK(t.test_size == 60 - 3 * s.n);
            if (uses_fewshot(s.method)) {
                CHECK(t.fewshot_size == 3 * s.n);
                CHECK(t.curve.size() == 3);
                CHECK(t.best_f1 >= t.final_f1);
                CHECK(t.gap == doctest::Approx(t.best_f1 - t.final_f1));
            }
        }
        CHECK(s.mean_final == doctest::Approx(mean));
    }
    const std::string csv = curves_csv(r);
    CHECK(csv.rfind("method,n,trial,iter,macro_f1\n", 0) == 0);
    const nlohmann::json j = to_json(r);
    CHECK(j.at("entries").size() == 12);
    CHECK(j.at("leakage_checks") == 6);
}

TEST_CASE("suite is deterministic and independent of the job count") {
    const GeneratedPair p = small_pair();
    SuiteOptions o = small_options();
    o.methods = {Method::kFinetune, Method::kFmdaTriplet, Method::kDannTune};
    const std::string a = to_json(run_suite(p, o)).dump(2);
    const std::string b = to_json(run_suite(p, o)).dump(2);
    o.jobs = 3;
    const std::string c = to_json(run_suite(p, o)).dump(2);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("unusable inputs produce warnings or errors") {
    const GeneratedPair p = small_pair();
    SuiteOptions o = small_options();
    o.methods = {Method::kFinetune, Method::kFinetune};
    o.n_values = {0, 2, 20, 2};
    const SuiteReport r = run_suite(p, o);
    CHECK(r.n_values == std::vector<std::size_t>{2});
    CHECK(r.entries.size() == 1);
    CHECK(r.warnings.size() == 3);
    o.n_values = {0};
    CHECK_THROWS_AS(run_suite(p, o), ConfigError);
    o = small_options();
    o.trials = 0;
    CHECK_THROWS_AS(run_suite(p, o), ConfigError);
}

TEST_CASE("feature export") {
    fmda::testing::TempDir dir("suite_export");
    RngStream rng(3, 1);
    const ModelParams params = fmda::testing::random_model(rng, 5, {8}, 32, 3);
    const GeneratedPair p = small_pair();
    LabeledDataset part = p.target.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const FeatureExportSet sets[] = {{&p.source, "source"}, {&part, "test"}};
    export_features(params, sets, dir / "f.csv");
    std::ifstream in(dir / "f.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("id,domain,label,split,f_0,", 0) == 0);
    CHECK(header.find(",f_31,pc1,pc2") != std::string::npos);
    std::size_t rows = 0;
    double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
    for (std::string line; std::getline(in, line); ++rows) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        REQUIRE(cells.size() == 4 + 32 + 2);
        const double a = std::stod(cells[36]), b = std::stod(cells[37]);
        s1 += a;
        s2 += b;
        q1 += a * a;
        q2 += b * b;
    }
    CHECK(rows == 130);
    CHECK(std::fabs(s1 / 130) < 1e-9);
    CHECK(q1 - s1 * s1 / 130 >= q2 - s2 * s2 / 130);
    CHECK_THROWS_AS(export_features(params, sets, dir / "missing" / "f.csv"), IoError);
}
