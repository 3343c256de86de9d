#include <doctest.h>

#include "fmda/config.hpp"
#include "fmda/errors.hpp"

using namespace fmda;

TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.lambda == 1.0);
    CHECK(c.lr == 1e-3);
    CHECK(c.pretrain_iters == 100);
    CHECK(c.adapt_iters == 1000);
    CHECK(c.batch_size_pretrain == 128);
    CHECK(c.adapt_batch_size() == 12);
    CHECK(c.alpha == 1.0);
    CHECK(c.beta == 0.3);
    CHECK(c.eval_every == 10);
    CHECK(c.hidden_dims == std::vector<std::size_t>{64, 64});
    CHECK(c.feature_dim == 32);
    CHECK_FALSE(c.detach_source);
    CHECK_FALSE(c.fixed_pairs);
    CHECK_FALSE(c.normalize_features);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON round-trip") {
    RunConfig c;
    c.lambda = 0.25;
    c.n = 3;
    c.seed = 0xFFFFFFFFFFFFFFFFULL;
    c.method = Method::kDannTune;
    c.hidden_dims = {8, 4, 2};
    c.fixed_pairs = true;
    c.lambda_d_horizon = 50;
    CHECK(run_config_from_json(to_json(c)) == c);
    CHECK(run_config_from_json(nlohmann::json::parse(to_json(c).dump())) == c);
    CHECK(run_config_keys().size() == to_json(c).size());
}

TEST_CASE("partial JSON overlays the base") {
    RunConfig base;
    base.n = 3;
    const RunConfig c = run_config_from_json({{"lambda", 0.5}}, base);
    CHECK(c.lambda == 0.5);
    CHECK(c.n == 3);
}

TEST_CASE("malformed JSON is a configuration error") {
    CHECK_THROWS_WITH_AS(run_config_from_json({{"lamda", 1.0}}), doctest::Contains("lamda"), ConfigError);
    CHECK_THROWS_AS(run_config_from_json({{"n", "ten"}}), ConfigError);
    CHECK_THROWS_AS(run_config_from_json({{"method", "magic"}}), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json::array()), ConfigError);
}

TEST_CASE("validation") {
    auto invalid = [](auto mutate) {
        RunConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    invalid([](RunConfig& c) { c.lambda = -0.1; });
    invalid([](RunConfig& c) { c.alpha = -1; });
    invalid([](RunConfig& c) { c.beta = -1; });
    invalid([](RunConfig& c) { c.n = 0; });
    invalid([](RunConfig& c) { c.lr = 0; });
    invalid([](RunConfig& c) { c.lr = std::nan(""); });
    invalid([](RunConfig& c) { c.num_classes = 1; });
    invalid([](RunConfig& c) { c.hidden_dims = {4, 0}; });
    invalid([](RunConfig& c) { c.trials = 0; });
    invalid([](RunConfig& c) { c.eval_every = 0; });
    invalid([](RunConfig& c) { c.batch_size_pretrain = 0; });
    invalid([](RunConfig& c) { c.lambda_d = -1; });
    RunConfig ok;
    ok.lambda = 0.0;
    ok.hidden_dims = {};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("method names") {
    for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
    CHECK(all_methods().size() == 6);
    CHECK(to_string(Method::kFmdaTriplet) == "fmda-triplet");
    CHECK_FALSE(uses_fewshot(Method::kWithoutTarget));
    CHECK_FALSE(uses_fewshot(Method::kDann));
    CHECK(uses_fewshot(Method::kDannTune));
    CHECK_THROWS_WITH_AS(parse_method("fmda"), doctest::Contains("fmda"), ConfigError);
}
