#include <stdexcept>
#include <string>

#include <doctest.h>

#include "repsim/config.hpp"
#include "repsim/engine.hpp"
#include "repsim/rng.hpp"

using namespace repsim;

TEST_CASE("defaults form a valid runnable configuration") {
  const SimConfig cfg = default_sim_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.population.n == 1000);
  CHECK(cfg.rounds == 200);
  CHECK(cfg.replications == 1);
  CHECK(cfg.seed == 42);
  CHECK(cfg.mechanism.coeff.mode == GainMode::self_normalized);
}

TEST_CASE("single keys are settable by name") {
  SimConfig cfg = default_sim_config();
  set_config_key(cfg, "agents", "250");
  CHECK(cfg.population.n == 250);
  set_config_key(cfg, "initial_distribution", "power_law");
  CHECK(cfg.population.initial_distribution == InitialDistribution::power_law);
  set_config_key(cfg, "learning_mode", "stake_correlated");
  CHECK(cfg.mechanism.learning_mode == LearningMode::stake_correlated);
  set_config_key(cfg, "consumer_selection", "true");
  CHECK(cfg.mechanism.consumer_selection);
  set_config_key(cfg, "consumer_selection", "off");
  CHECK_FALSE(cfg.mechanism.consumer_selection);
  set_config_key(cfg, "gamma", "0.25");
  CHECK(cfg.mechanism.gamma == 0.25);
  set_config_key(cfg, "seed", "18446744073709551615");  // max uint64
  CHECK(cfg.seed == 18446744073709551615ull);
  set_config_key(cfg, "coeff_mode", "raw");
  CHECK(cfg.mechanism.coeff.mode == GainMode::raw);
  set_config_key(cfg, "externality_mode", "fixed");
  CHECK(cfg.mechanism.externality_mode == ExternalityMode::fixed);
  set_config_key(cfg, "rating_sign_mode", "per_action_realization");
  CHECK(cfg.mechanism.rating_sign_mode ==
        RatingSignMode::per_action_realization);
}

TEST_CASE("config rejects unknown keys and bad values by name") {
  SimConfig cfg = default_sim_config();
  CHECK_THROWS_WITH_AS(set_config_key(cfg, "agent_count", "10"),
                       "unknown config key: agent_count",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(set_config_key(cfg, "alpha_l", "1.5"),
                       "alpha_l must lie in [0, 1], got 1.5",
                       std::invalid_argument);
  CHECK_THROWS_AS(set_config_key(cfg, "agents", "-5"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_key(cfg, "agents", "12x"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_key(cfg, "beta", "banana"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_key(cfg, "learning_mode", "sometimes"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_key(cfg, "consumer_selection", "maybe"),
                  std::invalid_argument);
}

TEST_CASE("config text parsing") {
  const SimConfig base = default_sim_config();

  SUBCASE("comments, blank lines and whitespace are tolerated") {
    const std::string text =
        "# run setup\n"
        "\n"
        "agents = 64   # inline note\n"
        "  rounds=12\n"
        "gamma = 0.5\n";
    const SimConfig cfg = parse_config(text, base);
    CHECK(cfg.population.n == 64);
    CHECK(cfg.rounds == 12);
    CHECK(cfg.mechanism.gamma == 0.5);
    CHECK(cfg.seed == base.seed);  // untouched keys keep base values
  }
  SUBCASE("later duplicates win") {
    const SimConfig cfg = parse_config("agents = 10\nagents = 20\n", base);
    CHECK(cfg.population.n == 20);
  }
  SUBCASE("parse errors carry the line number") {
    CHECK_THROWS_WITH_AS(parse_config("agents = 10\njust words\n", base),
                         "line 2: expected 'key = value', got 'just words'",
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_config("= 5\n", base), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("agents =\n", base), std::invalid_argument);
  }
  SUBCASE("strict mode requires the run-defining keys") {
    const std::string text = "agents = 10\nrounds = 5\nreplications = 1\n";
    CHECK_THROWS_WITH_AS(parse_config(text, base, false),
                         "missing required key: seed", std::invalid_argument);
    CHECK_NOTHROW(parse_config(text + "seed = 9\n", base, false));
  }
}

TEST_CASE("serialization round-trips through the parser") {
  SimConfig cfg = default_sim_config();
  set_config_key(cfg, "agents", "77");
  set_config_key(cfg, "initial_distribution", "power_law");
  set_config_key(cfg, "power_law_alpha", "2.75");
  set_config_key(cfg, "learning_mode", "uniform");
  set_config_key(cfg, "alpha_l", "0.625");
  set_config_key(cfg, "externality_mode", "exponential");
  set_config_key(cfg, "externality_mean", "12.5");
  set_config_key(cfg, "contributor_fraction", "0.3");
  set_config_key(cfg, "seed", "1234567890123456789");
  set_config_key(cfg, "out_dir", "elsewhere");

  const SimConfig back = parse_config(serialize_config(cfg),
                                      default_sim_config(), false);
  CHECK(serialize_config(back) == serialize_config(cfg));
  CHECK(back.population.n == 77);
  CHECK(back.population.power_law.alpha == 2.75);
  CHECK(back.mechanism.alpha_l == 0.625);
  CHECK(back.seed == 1234567890123456789ull);
  CHECK(back.out_dir == "elsewhere");
}

TEST_CASE("run metadata embeds tool, stream and config identity") {
  SimConfig cfg = default_sim_config();
  const std::string meta = run_meta_text(cfg);
  CHECK(meta.find(kToolVersion) != std::string::npos);
  CHECK(meta.find(kRngId) != std::string::npos);
  // The body stays a parseable config, comments included.
  const SimConfig back = parse_config(meta, default_sim_config(), false);
  CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("presets cover the documented scenario grid") {
  const auto names = preset_names();
  REQUIRE(names.size() == 12);
  for (const auto& name : names) {
    const SimConfig cfg = preset_config(name);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.out_dir == "out/" + name);
  }
  CHECK_THROWS_AS(preset_config("figure1"), std::invalid_argument);

  const SimConfig uniform_baseline = preset_config("figure2");
  CHECK(uniform_baseline.population.initial_distribution ==
        InitialDistribution::uniform);
  CHECK(uniform_baseline.mechanism.learning_mode == LearningMode::off);
  CHECK(uniform_baseline.mechanism.externality_mode == ExternalityMode::none);

  const SimConfig skewed = preset_config("figure4");
  CHECK(skewed.population.initial_distribution ==
        InitialDistribution::power_law);

  const SimConfig learning = preset_config("figure8");
  CHECK(learning.mechanism.learning_mode == LearningMode::stake_correlated);

  const SimConfig selection = preset_config("figure12");
  CHECK(selection.mechanism.consumer_selection);
  CHECK(selection.population.initial_distribution ==
        InitialDistribution::power_law);
  CHECK(selection.mechanism.learning_mode == LearningMode::off);

  const SimConfig full_grid = preset_config("figure13");
  CHECK(full_grid.mechanism.consumer_selection);
  CHECK(full_grid.mechanism.learning_mode == LearningMode::uniform);
}

TEST_CASE("sweepable keys are the numeric mechanism and population knobs") {
  CHECK(is_sweepable_key("gamma"));
  CHECK(is_sweepable_key("alpha_l"));
  CHECK(is_sweepable_key("power_law_alpha"));
  CHECK(is_sweepable_key("p_skip_action"));
  CHECK_FALSE(is_sweepable_key("agents"));        // structural, not numeric-continuous
  CHECK_FALSE(is_sweepable_key("seed"));
  CHECK_FALSE(is_sweepable_key("out_dir"));
  CHECK_FALSE(is_sweepable_key("learning_mode"));
}

TEST_CASE("safety limit is reachable through the config surface") {
  SimConfig cfg = default_sim_config();
  set_config_key(cfg, "agents", "200000");
  set_config_key(cfg, "rounds", "100000");
  set_config_key(cfg, "replications", "100");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  set_config_key(cfg, "override_safety", "true");
  CHECK_NOTHROW(cfg.validate());
}
