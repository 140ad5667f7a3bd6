#include <doctest.h>

#include "kxdoc/config.hpp"

using namespace kxdoc;

TEST_CASE("key-value config parses sections, comments, and quotes") {
    auto kv = KeyValueConfig::parse_string(
        "# comment\n"
        "mode = ecc\n"
        "hops = 4\n"
        "[filter]\n"
        "top_k = 8\n"
        "lambda = 0.1\n"
        "[train]\n"
        "optimizer = \"adamw\"\n"
        "learning_rate = 1e-3\n");
    CHECK(kv.get_string("mode", "") == "ecc");
    CHECK(kv.get_int("hops", 0) == 4);
    CHECK(kv.get_int("filter.top_k", 0) == 8);
    CHECK(kv.get_double("filter.lambda", 0) == 0.1);
    CHECK(kv.get_string("train.optimizer", "") == "adamw");

    RunConfig rc = run_config_from(kv);
    CHECK(rc.pipeline.hops == 4);
    CHECK(rc.pipeline.filter.top_k == 8);
    CHECK(rc.pipeline.mode == ContextMode::ECC);
}

TEST_CASE("defaults carry the documented hyperparameters") {
    RunConfig rc = run_config_from(KeyValueConfig::parse_string(""));
    CHECK(rc.pipeline.filter.lambda_w == 0.1);
    CHECK(rc.pipeline.filter.eta_w == 0.01);
    CHECK(rc.pipeline.filter.kappa_w == 0.001);
    CHECK(rc.pipeline.filter.top_k == 16);
    CHECK(rc.pipeline.hops == 5);
    CHECK(rc.pipeline.enc.num_layers == 3);
    CHECK(rc.pipeline.theta == 0.0);
    CHECK(rc.retrieval.top_k == 16);
    CHECK(rc.setting == Setting::Closed);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(run_config_from(KeyValueConfig::parse_string("no_such_key = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(run_config_from(KeyValueConfig::parse_string("mode = sideways\n")),
                    ConfigError);
    CHECK_THROWS_AS(run_config_from(KeyValueConfig::parse_string("train.optimizer = sgd\n")),
                    ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse_string("just a line\n"), ConfigError);
}
