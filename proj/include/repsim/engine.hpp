#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "repsim/mechanics.hpp"
#include "repsim/rng.hpp"
#include "repsim/sampling.hpp"

namespace repsim {

// Immutable per-agent traits drawn at setup.
struct AgentParams {
  AgentId agent_id = 0;
  double mu_i = 0.0;     // mean quality of the agent's actions
  double sigma_i = 0.5;  // spread of realized quality around mu_i
  double alpha_l = 0.0;  // learning intensity in [0, 1]; 0 freezes the rates
  double beta = 0.5;     // per-step movement clamp in (0, 1)
};

// Mutable per-agent ledger. pool_action and pool_rating are the credits
// earmarked per category; their sum never exceeds credit, and all three
// stay nonnegative.
struct AgentState {
  double credit = 0.0;
  double sr_a_cap = 0.0;           // upper bound on the action staking rate
  double stake_rate_action = 0.0;  // in [0, sr_a_cap]
  double stake_rate_rating = 0.0;  // action + rating rates sum to <= 1
  double pool_action = 0.0;
  double pool_rating = 0.0;
};

enum class InitialDistribution { uniform, power_law };

struct PopulationConfig {
  std::uint32_t n = 1000;
  double cp_total = 1e6;
  InitialDistribution initial_distribution = InitialDistribution::uniform;
  PowerLawSpec power_law{1.0, 2.5};
  double population_mu = 0.0;
  double population_sigma = 1.0;   // spread of mu_i across agents
  double within_agent_sigma = 0.5; // spread of quality within one agent
  void validate() const;
};

enum class LearningMode { off, uniform, random_per_agent, stake_correlated };
enum class RatingSignMode { per_rater_bernoulli, per_action_realization };
enum class ExternalityMode { none, exponential, fixed };

struct MechanismConfig {
  double p_skip_action = 0.2;
  double p_skip_rating = 0.2;
  bool consumer_selection = false;  // rating targets weighted by action stake
  std::uint32_t ratings_per_rater = 1;
  LearningMode learning_mode = LearningMode::off;
  double alpha_l = 0.5;  // used when learning_mode == uniform
  double beta = 0.5;
  double gamma = 0.0;  // externality pass-through factor
  ExternalityMode externality_mode = ExternalityMode::none;
  double externality_mean = 0.0;
  // Contributors are the first ceil(contributor_fraction * n) agents by id,
  // so a marked agent can be pinned down deterministically.
  double contributor_fraction = 0.0;
  GainCoefficients coeff{};
  RatingSignMode rating_sign_mode = RatingSignMode::per_rater_bernoulli;
  void validate() const;
};

struct SimConfig {
  PopulationConfig population;
  MechanismConfig mechanism;
  std::uint32_t rounds = 200;
  std::uint32_t replications = 1;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::uint32_t jobs = 1;
  std::uint32_t bins = 10;
  bool override_safety = false;
  void validate() const;  // enforces the agent-rounds safety limit
};

// Hard ceiling on rounds * agents * replications unless overridden.
inline constexpr std::uint64_t kAgentRoundSafetyLimit = 1'000'000'000ull;

struct Population {
  std::vector<AgentParams> params;
  std::vector<AgentState> states;
  std::size_t size() const { return params.size(); }
};

struct RoundParticipants {
  std::vector<AgentId> actors;
  std::vector<AgentId> raters;
};

struct RoundEvents {
  std::vector<ActionStakeRecord> actions;
  std::vector<RatingStakeRecord> ratings;
};

// Per-agent view of the ledger after a round fully settled.
struct AgentSnapshot {
  double credit = 0.0;
  double stake_rate_action = 0.0;
  double stake_rate_rating = 0.0;
};

struct RoundOutcome {
  std::uint32_t round_index = 0;
  std::vector<CreditDelta> deltas;  // one entry per agent, abstainers at 0
  RoundEvents events;
  std::vector<AgentSnapshot> snapshots;
};

struct ReplicationResult {
  std::uint32_t replication_index = 0;
  std::vector<AgentParams> params;
  std::vector<AgentState> initial_states;
  std::vector<AgentState> final_states;
  std::vector<RoundOutcome> rounds;
  std::vector<CreditDelta> cumulative;  // per-agent sums over all rounds
};

struct SimulationResult {
  SimConfig config;
  std::vector<ReplicationResult> replications;
};

// Draws credits, staking-rate split and mu_i for every agent. Credits are
// either cp_total / n each or power-law draws rescaled to sum to cp_total.
// Learning intensities start at 0; see assign_learning_intensities.
Population init_population(const PopulationConfig& cfg, RngStream& rng);

void assign_learning_intensities(Population& pop, const MechanismConfig& cfg,
                                 RngStream& rng);

// Independent skip draws per agent; an agent can act and rate in one round.
RoundParticipants select_round_participants(const Population& pop,
                                            const MechanismConfig& cfg,
                                            RngStream& rng);

// One action per actor, staked at stake_rate_action * pool_action.
// Zero-stake actors emit nothing. action_id equals the actor id, which is
// unique within a round.
std::vector<ActionStakeRecord> generate_actions(std::span<const AgentId> actors,
                                                const Population& pop);

// Every rater targets up to ratings_per_rater distinct foreign actions,
// weighted by action stake when consumer_selection is on, uniformly
// otherwise. Magnitude is stake_rate_rating * pool_rating.
std::vector<RatingStakeRecord> assign_ratings(
    std::span<const AgentId> raters,
    std::span<const ActionStakeRecord> actions, const Population& pop,
    const MechanismConfig& cfg, RngStream& rng);

// S' = S + alpha_l * sign(d) * min(|d|, beta*|S|, beta*|1-S|).
// d is the dimensionless settled delta; the result never leaves [0, 1].
double update_action_stake(const AgentParams& params, double stake_rate_action,
                           double d_action);

// Same movement rule, then capped at 1 - new_stake_rate_action so the two
// rates keep summing to at most 1.
double update_rating_stake(const AgentParams& params, double stake_rate_rating,
                           double d_rating, double new_stake_rate_action);

// Full round: participation, actions, ratings, settlement with category
// clamps, learning updates, pool replenishment at the new rates.
RoundOutcome run_round(Population& pop, const MechanismConfig& cfg,
                       std::uint32_t round_index, RngStream& rng);

// Runs cfg.replications independent replications, each on RngStream(seed, r),
// optionally across cfg.jobs threads. Results are ordered by replication
// index regardless of scheduling.
SimulationResult run_simulation(const SimConfig& cfg);

}  // namespace repsim
