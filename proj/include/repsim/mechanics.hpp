#pragma once

#include <cstdint>
#include <span>

namespace repsim {

using AgentId = std::uint32_t;
using ActionId = std::uint32_t;

// Credits an actor put behind one ratable action. Zero-stake actions are
// abstentions and never appear as records.
struct ActionStakeRecord {
  AgentId actor_id = 0;
  ActionId action_id = 0;
  double stake = 0.0;  // > 0
};

// One rating with credits behind it; the sign of signed_stake carries the
// rating direction, the magnitude the staked amount.
struct RatingStakeRecord {
  AgentId rater_id = 0;
  ActionId action_id = 0;
  double signed_stake = 0.0;  // != 0
};

enum class GainMode {
  // Credit change is coefficient * sum of signed stake products.
  raw,
  // Each gain sum is divided by the sum of absolute stake products, so a
  // single term lands in [-1, 1]; settle_agent then scales the ratio by the
  // credits the agent staked in that category this round.
  self_normalized,
};

struct GainCoefficients {
  double c_r2a = 1e-3;  // rating -> actor coupling, raw mode only
  double c_r2r = 1e-3;  // rating -> co-rater coupling, raw mode only
  GainMode mode = GainMode::self_normalized;

  static GainCoefficients raw(double c_r2a, double c_r2r) {
    return {c_r2a, c_r2r, GainMode::raw};
  }
  static GainCoefficients self_normalized() {
    return {0.0, 0.0, GainMode::self_normalized};
  }
  void validate() const;
};

// Settled per-round credit movement for one agent, split by source.
struct CreditDelta {
  AgentId agent_id = 0;
  double d_action = 0.0;       // from ratings received on own actions
  double d_rating = 0.0;       // from co-rater agreement on rated actions
  double d_externality = 0.0;  // gamma-scaled external inflow, >= 0
  double total() const { return d_action + d_rating + d_externality; }
};

struct AlignmentProbabilities {
  double p_align = 0.0;     // p^2 + (1-p)^2
  double p_misalign = 0.0;  // 2 p (1-p)
};

// Gain on the agent's own actions from the ratings they received.
// Every rating must reference one of actions_of_agent; a rating whose
// rater is the actor itself is rejected.
double action_gain(std::span<const ActionStakeRecord> actions_of_agent,
                   std::span<const RatingStakeRecord> ratings_on_them,
                   const GainCoefficients& coeff);

// Gain from co-raters who rated the same actions as the agent; pairs are
// matched on action_id and each product is positive when the two ratings
// point the same way. co_ratings must not contain the agent's own records
// and must reference actions the agent actually rated.
double rating_cross_gain(std::span<const RatingStakeRecord> ratings_by_agent,
                         std::span<const RatingStakeRecord> co_ratings,
                         const GainCoefficients& coeff);

// Full settlement for one agent: partitions all_ratings into ratings on
// the agent's actions, the agent's own ratings, and co-ratings matched on
// action_id, then applies the two gains plus gamma * externality.
// all_ratings may be any superset of the records relevant to the agent.
CreditDelta settle_agent(AgentId agent_id,
                         std::span<const ActionStakeRecord> actions_of_agent,
                         std::span<const RatingStakeRecord> all_ratings,
                         const GainCoefficients& coeff, double gamma,
                         double externality);

// Losses are bounded by the category pool; gains pass through untouched.
double clamp_to_pool(double delta, double pool);

// Chance that two independent ratings with positive-share p_plus agree,
// and that they disagree. The two always sum to 1.
AlignmentProbabilities alignment_probabilities(double p_plus);

}  // namespace repsim
