#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "repsim/mechanics.hpp"
#include "repsim/rng.hpp"

using namespace repsim;

namespace {

// Independent route: enumerate every (action, rating) pair and sum signed
// products, with no shared code with the implementation.
double brute_force_action_sum(const std::vector<ActionStakeRecord>& actions,
                              const std::vector<RatingStakeRecord>& ratings) {
  double total = 0.0;
  for (const auto& a : actions) {
    for (const auto& r : ratings) {
      if (r.action_id == a.action_id) total += a.stake * r.signed_stake;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("action gain, raw mode, hand examples") {
  const auto coeff = GainCoefficients::raw(1.0, 1.0);
  CHECK(action_gain({}, {}, coeff) == 0.0);

  const std::vector<ActionStakeRecord> actions{{1, 10, 0.4}};
  const std::vector<RatingStakeRecord> one{{2, 10, 0.5}};
  CHECK(action_gain(actions, one, coeff) ==
        doctest::Approx(0.2).epsilon(1e-12));

  const auto scaled = GainCoefficients::raw(1e-3, 1.0);
  CHECK(action_gain(actions, one, scaled) ==
        doctest::Approx(2e-4).epsilon(1e-12));
}

TEST_CASE("action gain, raw mode, matches a brute-force oracle") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ActionStakeRecord> actions;
    const int n_actions = 1 + static_cast<int>(rng.uniform01() * 4);
    for (int m = 0; m < n_actions; ++m) {
      actions.push_back({7, static_cast<ActionId>(100 + m),
                         0.1 + rng.uniform01() * 5.0});
    }
    std::vector<RatingStakeRecord> ratings;
    const int n_ratings = static_cast<int>(rng.uniform01() * 12);
    for (int j = 0; j < n_ratings; ++j) {
      const auto target = static_cast<ActionId>(
          100 + static_cast<int>(rng.uniform01() * n_actions));
      const double mag = 0.1 + rng.uniform01() * 3.0;
      ratings.push_back(
          {static_cast<AgentId>(8 + j), target,
           rng.uniform01() < 0.5 ? -mag : mag});
    }
    const double expected = brute_force_action_sum(actions, ratings);
    CHECK(action_gain(actions, ratings, GainCoefficients::raw(1.0, 1.0)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("action gain, self-normalized, lands in [-1, 1]") {
  const auto coeff = GainCoefficients::self_normalized();
  const std::vector<ActionStakeRecord> actions{{1, 10, 2.0}};

  SUBCASE("single rating of either sign saturates the bound") {
    const std::vector<RatingStakeRecord> up{{2, 10, 0.7}};
    const std::vector<RatingStakeRecord> down{{2, 10, -0.7}};
    CHECK(action_gain(actions, up, coeff) == 1.0);
    CHECK(action_gain(actions, down, coeff) == -1.0);
  }
  SUBCASE("two ratings +3 and -1 on a stake-2 action") {
    const std::vector<RatingStakeRecord> ratings{{2, 10, 3.0}, {3, 10, -1.0}};
    // (6 - 2) / (6 + 2)
    CHECK(action_gain(actions, ratings, coeff) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("no ratings received is neutral, not undefined") {
    CHECK(action_gain(actions, {}, coeff) == 0.0);
  }
  SUBCASE("randomized inputs stay inside the bounds") {
    RngStream rng(32, 0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<RatingStakeRecord> ratings;
      const int n = 1 + static_cast<int>(rng.uniform01() * 10);
      for (int j = 0; j < n; ++j) {
        const double mag = 0.01 + rng.uniform01() * 9.0;
        ratings.push_back({static_cast<AgentId>(2 + j), 10,
                           rng.uniform01() < 0.5 ? -mag : mag});
      }
      const double g = action_gain(actions, ratings, coeff);
      REQUIRE(g >= -1.0);
      REQUIRE(g <= 1.0);
    }
  }
}

TEST_CASE("rating cross gain, hand examples") {
  const std::vector<RatingStakeRecord> mine{{1, 10, 0.5}};

  SUBCASE("raw mode signed products") {
    const auto coeff = GainCoefficients::raw(1.0, 1.0);
    const std::vector<RatingStakeRecord> co_up{{2, 10, 0.4}};
    const std::vector<RatingStakeRecord> co_down{{2, 10, -0.4}};
    CHECK(rating_cross_gain(mine, co_up, coeff) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rating_cross_gain(mine, co_down, coeff) ==
          doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(rating_cross_gain(mine, {}, coeff) == 0.0);
    CHECK(rating_cross_gain({}, {}, coeff) == 0.0);
  }
  SUBCASE("self-normalized single agreeing co-rater") {
    const std::vector<RatingStakeRecord> co{{2, 10, 2.5}};
    CHECK(rating_cross_gain(mine, co, GainCoefficients::self_normalized()) ==
          1.0);
  }
  SUBCASE("negative ratings agreeing is still alignment") {
    const std::vector<RatingStakeRecord> down{{1, 10, -0.5}};
    const std::vector<RatingStakeRecord> co{{2, 10, -1.0}};
    CHECK(rating_cross_gain(down, co, GainCoefficients::self_normalized()) ==
          1.0);
  }
}

TEST_CASE("raw-mode gains are bilinear in the stakes") {
  const auto coeff = GainCoefficients::raw(1.0, 1.0);
  RngStream rng(33, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double s_a = 0.1 + rng.uniform01() * 2.0;
    const double s_r = 0.1 + rng.uniform01() * 2.0;
    const double k = 0.5 + rng.uniform01() * 3.0;
    const std::vector<ActionStakeRecord> a1{{1, 10, s_a}};
    const std::vector<ActionStakeRecord> a2{{1, 10, k * s_a}};
    const std::vector<RatingStakeRecord> r1{{2, 10, s_r}};
    const std::vector<RatingStakeRecord> r2{{2, 10, k * s_r}};
    const double base = action_gain(a1, r1, coeff);
    CHECK(action_gain(a2, r1, coeff) ==
          doctest::Approx(k * base).epsilon(1e-12));
    CHECK(action_gain(a1, r2, coeff) ==
          doctest::Approx(k * base).epsilon(1e-12));
  }
}

TEST_CASE("flipping every rating sign negates the gain in both modes") {
  const std::vector<ActionStakeRecord> actions{{1, 10, 1.5}, {1, 11, 0.5}};
  std::vector<RatingStakeRecord> ratings{
      {2, 10, 0.7}, {3, 10, -0.2}, {4, 11, 1.1}};
  std::vector<RatingStakeRecord> flipped = ratings;
  for (auto& r : flipped) r.signed_stake = -r.signed_stake;

  for (const auto& coeff : {GainCoefficients::raw(0.3, 0.3),
                            GainCoefficients::self_normalized()}) {
    CHECK(action_gain(actions, ratings, coeff) ==
          doctest::Approx(-action_gain(actions, flipped, coeff))
              .epsilon(1e-12));
  }
}

TEST_CASE("pairwise cross-gain is reciprocal in raw mode") {
  const auto coeff = GainCoefficients::raw(1.0, 0.7);
  const std::vector<RatingStakeRecord> by_i{{1, 10, 0.8}};
  const std::vector<RatingStakeRecord> by_j{{2, 10, -1.2}};
  CHECK(rating_cross_gain(by_i, by_j, coeff) ==
        doctest::Approx(rating_cross_gain(by_j, by_i, coeff))
            .epsilon(1e-12));
}

TEST_CASE("settlement composes the three sources") {
  SUBCASE("no activity, externality only") {
    const CreditDelta d = settle_agent(1, {}, {}, GainCoefficients::raw(1, 1),
                                       0.5, 10.0);
    CHECK(d.d_action == 0.0);
    CHECK(d.d_rating == 0.0);
    CHECK(d.d_externality == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(d.total() == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("no activity at all is the zero delta") {
    const CreditDelta d =
        settle_agent(1, {}, {}, GainCoefficients::self_normalized(), 0.0, 0.0);
    CHECK(d.total() == 0.0);
  }
  SUBCASE("self-normalized delta is denominated in staked credits") {
    const std::vector<ActionStakeRecord> actions{{1, 10, 8.0}};
    const std::vector<RatingStakeRecord> ratings{{2, 10, 0.5}};
    const CreditDelta d = settle_agent(
        1, actions, ratings, GainCoefficients::self_normalized(), 0.0, 0.0);
    CHECK(d.d_action == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(d.d_rating == 0.0);
  }
  SUBCASE("superset of ratings is filtered down to the agent's records") {
    // Agent 1 acted (action 10) and rated action 20; agent 3's rating of
    // action 30 is noise that must not contribute.
    const std::vector<ActionStakeRecord> actions{{1, 10, 2.0}};
    const std::vector<RatingStakeRecord> all{
        {2, 10, 1.0},   // on agent 1's action
        {1, 20, 0.5},   // agent 1's own rating
        {4, 20, 0.25},  // co-rater agreeing with agent 1
        {3, 30, -9.0},  // unrelated
    };
    const CreditDelta d = settle_agent(
        1, actions, all, GainCoefficients::self_normalized(), 0.0, 0.0);
    CHECK(d.d_action == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.d_rating == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("loss clamp respects the category pool") {
  CHECK(clamp_to_pool(-5.0, 3.0) == -3.0);
  CHECK(clamp_to_pool(7.0, 3.0) == 7.0);
  CHECK(clamp_to_pool(-2.0, 3.0) == -2.0);
  CHECK(clamp_to_pool(0.0, 0.0) == 0.0);
  CHECK(clamp_to_pool(-1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(clamp_to_pool(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("alignment probabilities") {
  const auto at_09 = alignment_probabilities(0.9);
  CHECK(at_09.p_align == doctest::Approx(0.82).epsilon(1e-12));
  CHECK(at_09.p_misalign == doctest::Approx(0.18).epsilon(1e-12));

  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    const auto probs = alignment_probabilities(p);
    CHECK(probs.p_align + probs.p_misalign ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probs.p_align >= 0.5 - 1e-12);
    if (i != 50) CHECK(probs.p_align > probs.p_misalign);
  }
  const auto mid = alignment_probabilities(0.5);
  CHECK(mid.p_align == doctest::Approx(mid.p_misalign).epsilon(1e-12));
  CHECK_THROWS_AS(alignment_probabilities(1.01), std::invalid_argument);
}

TEST_CASE("mechanics rejects malformed inputs") {
  const auto coeff = GainCoefficients::self_normalized();
  const std::vector<ActionStakeRecord> actions{{1, 10, 2.0}};

  SUBCASE("rating referencing a foreign action") {
    const std::vector<RatingStakeRecord> ratings{{2, 99, 1.0}};
    CHECK_THROWS_AS(action_gain(actions, ratings, coeff), std::runtime_error);
  }
  SUBCASE("self-rating") {
    const std::vector<RatingStakeRecord> ratings{{1, 10, 1.0}};
    CHECK_THROWS_AS(action_gain(actions, ratings, coeff), std::runtime_error);
  }
  SUBCASE("zero-stake records") {
    const std::vector<ActionStakeRecord> bad_action{{1, 10, 0.0}};
    CHECK_THROWS_AS(action_gain(bad_action, {}, coeff),
                    std::invalid_argument);
    const std::vector<RatingStakeRecord> bad_rating{{2, 10, 0.0}};
    CHECK_THROWS_AS(action_gain(actions, bad_rating, coeff),
                    std::invalid_argument);
  }
  SUBCASE("mixed raters in one agent's rating set") {
    const std::vector<RatingStakeRecord> mixed{{2, 10, 1.0}, {3, 11, 1.0}};
    CHECK_THROWS_AS(rating_cross_gain(mixed, {}, coeff),
                    std::invalid_argument);
  }
  SUBCASE("duplicate rating on one action") {
    const std::vector<RatingStakeRecord> dup{{2, 10, 1.0}, {2, 10, 0.5}};
    CHECK_THROWS_AS(rating_cross_gain(dup, {}, coeff), std::invalid_argument);
  }
  SUBCASE("co-rating set containing the agent's own record") {
    const std::vector<RatingStakeRecord> mine{{2, 10, 1.0}};
    const std::vector<RatingStakeRecord> co{{2, 10, 0.5}};
    CHECK_THROWS_AS(rating_cross_gain(mine, co, coeff), std::runtime_error);
  }
  SUBCASE("co-rating on an action the agent never rated") {
    const std::vector<RatingStakeRecord> mine{{2, 10, 1.0}};
    const std::vector<RatingStakeRecord> co{{3, 11, 0.5}};
    CHECK_THROWS_AS(rating_cross_gain(mine, co, coeff), std::runtime_error);
  }
  SUBCASE("co-ratings without any own ratings") {
    const std::vector<RatingStakeRecord> co{{3, 11, 0.5}};
    CHECK_THROWS_AS(rating_cross_gain({}, co, coeff), std::runtime_error);
  }
  SUBCASE("settling a foreign action") {
    const std::vector<ActionStakeRecord> foreign{{2, 10, 1.0}};
    CHECK_THROWS_AS(settle_agent(1, foreign, {}, coeff, 0.0, 0.0),
                    std::invalid_argument);
  }
  SUBCASE("negative externality") {
    CHECK_THROWS_AS(settle_agent(1, actions, {}, coeff, 0.5, -1.0),
                    std::invalid_argument);
  }
}
