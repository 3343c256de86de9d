#include "fmda/config.hpp"

#include <algorithm>
#include <cmath>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

struct MethodName {
    Method method;
    std::string_view name;
};

constexpr MethodName kMethodNames[] = {
    {Method::kWithoutTarget, "without-target"}, {Method::kDann, "dann"},
    {Method::kFinetune, "finetune"},            {Method::kDannTune, "dann-tune"},
    {Method::kFmdaL2, "fmda-l2"},               {Method::kFmdaTriplet, "fmda-triplet"},
};

}  // namespace

std::string_view to_string(Method m) {
    for (const auto& entry : kMethodNames) {
        if (entry.method == m) return entry.name;
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    for (const auto& entry : kMethodNames) {
        if (entry.name == text) return entry.method;
    }
    throw ConfigError("unknown method '" + std::string(text) +
                      "' (expected one of without-target, dann, finetune, dann-tune, fmda-l2, "
                      "fmda-triplet)");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::kWithoutTarget, Method::kDann,
                                             Method::kFinetune,      Method::kDannTune,
                                             Method::kFmdaL2,        Method::kFmdaTriplet};
    return methods;
}

bool uses_fewshot(Method m) { return m != Method::kWithoutTarget && m != Method::kDann; }

void RunConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
    if (n < 1) fail("n must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be finite and > 0");
    if (batch_size_pretrain < 1) fail("batch_size_pretrain must be >= 1");
    if (num_classes < 2) fail("num_classes must be >= 2");
    if (feature_dim < 1) fail("feature_dim must be >= 1");
    if (std::any_of(hidden_dims.begin(), hidden_dims.end(), [](std::size_t w) { return w == 0; }))
        fail("hidden_dims entries must be >= 1");
    if (std::any_of(disc_hidden.begin(), disc_hidden.end(), [](std::size_t w) { return w == 0; }))
        fail("disc_hidden entries must be >= 1");
    if (trials < 1) fail("trials must be >= 1");
    if (eval_every < 1) fail("eval_every must be >= 1");
    if (!(lambda_d >= 0.0) || !std::isfinite(lambda_d)) fail("lambda_d must be finite and >= 0");
    if (!(lambda_d_end >= 0.0) || !std::isfinite(lambda_d_end))
        fail("lambda_d_end must be finite and >= 0");
}

nlohmann::json to_json(const RunConfig& c) {
    return {
        {"lambda", c.lambda},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"n", c.n},
        {"lr", c.lr},
        {"pretrain_iters", c.pretrain_iters},
        {"adapt_iters", c.adapt_iters},
        {"batch_size_pretrain", c.batch_size_pretrain},
        {"num_classes", c.num_classes},
        {"hidden_dims", c.hidden_dims},
        {"feature_dim", c.feature_dim},
        {"seed", c.seed},
        {"trials", c.trials},
        {"method", std::string(to_string(c.method))},
        {"eval_every", c.eval_every},
        {"detach_source", c.detach_source},
        {"fixed_pairs", c.fixed_pairs},
        {"normalize_features", c.normalize_features},
        {"lambda_d", c.lambda_d},
        {"lambda_d_end", c.lambda_d_end},
        {"lambda_d_horizon", c.lambda_d_horizon},
        {"disc_hidden", c.disc_hidden},
    };
}

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        const nlohmann::json defaults = to_json(RunConfig{});
        for (const auto& [key, _] : defaults.items()) k.push_back(key);
        return k;
    }();
    return keys;
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    const auto& keys = run_config_keys();
    for (const auto& [key, _] : j.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        get("lambda", c.lambda);
        get("alpha", c.alpha);
        get("beta", c.beta);
        get("n", c.n);
        get("lr", c.lr);
        get("pretrain_iters", c.pretrain_iters);
        get("adapt_iters", c.adapt_iters);
        get("batch_size_pretrain", c.batch_size_pretrain);
        get("num_classes", c.num_classes);
        get("hidden_dims", c.hidden_dims);
        get("feature_dim", c.feature_dim);
        get("seed", c.seed);
        get("trials", c.trials);
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        get("eval_every", c.eval_every);
        get("detach_source", c.detach_source);
        get("fixed_pairs", c.fixed_pairs);
        get("normalize_features", c.normalize_features);
        get("lambda_d", c.lambda_d);
        get("lambda_d_end", c.lambda_d_end);
        get("lambda_d_horizon", c.lambda_d_horizon);
        get("disc_hidden", c.disc_hidden);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace fmda
