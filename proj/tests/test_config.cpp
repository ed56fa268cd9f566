#include <doctest.h>

#include <stdexcept>

#include "kljnlab/experiments.hpp"

using namespace kljnlab;

TEST_CASE("config: defaults are valid for every experiment") {
    for (const char* name :
         {"kljn", "noiseless", "attack-suite", "markov-test", "distill-sweep"}) {
        ExperimentConfig cfg = ExperimentConfig::defaults();
        cfg.experiment = name;
        CHECK_NOTHROW(cfg.validate());
    }
    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.experiment = "bogus";
    CHECK_THROWS_AS(cfg.validate(), std::domain_error);
}

TEST_CASE("config: json round trip reproduces the effective config") {
    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.experiment = "distill-sweep";
    cfg.seed = 987;
    cfg.kljn.cycles = 123;
    cfg.line.tap_positions = {2, 5};
    cfg.distill.re_grid_ohms = {0.0, 50.0};
    const std::string text = cfg.to_json_text();
    const ExperimentConfig back = ExperimentConfig::from_json_text(text);
    CHECK(back.to_json_text() == text);
    CHECK(back.seed == 987);
    CHECK(back.kljn.cycles == 123);
    CHECK(back.line.tap_positions == std::vector<std::size_t>{2, 5});
    CHECK(back.distill.re_grid_ohms == std::vector<double>{0.0, 50.0});
}

TEST_CASE("config: parse errors and partial overrides") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{ not json"), std::domain_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"kljn": {"cycles": "many"}})"),
                    std::domain_error);
    // one threshold without the other is rejected
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text(R"({"kljn": {"theta_low_v2": 1.0}})"),
        std::domain_error);

    const ExperimentConfig cfg = ExperimentConfig::from_json_text(
        R"({"experiment": "noiseless", "seed": 5, "noiseless": {"cycles": 17}})");
    CHECK(cfg.experiment == "noiseless");
    CHECK(cfg.seed == 5);
    CHECK(cfg.noiseless.cycles == 17);
    CHECK(cfg.kljn.cycles == ExperimentConfig::defaults().kljn.cycles);
}

TEST_CASE("config: missing config file is a domain error") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_file("/nonexistent/path.json"),
                    std::domain_error);
}
