#include "repsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace repsim {

namespace {

[[noreturn]] void fail_config(const std::string& what) {
  throw std::invalid_argument(what);
}

void require_unit_interval(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail_config(std::string(key) + " must lie in [0, 1], got " +
                std::to_string(v));
  }
}

std::size_t contributor_count(const MechanismConfig& cfg, std::size_t n) {
  const double k = std::ceil(cfg.contributor_fraction * static_cast<double>(n));
  return std::min(n, static_cast<std::size_t>(k));
}

// Puts the earmarked pools back to rate * credit. The subtraction order
// guarantees pool_action + pool_rating <= credit even after rounding.
void replenish_pools(AgentState& s) {
  double pa = s.credit * s.stake_rate_action;
  if (pa > s.credit) pa = s.credit;
  const double rem = s.credit - pa;
  double pr = s.credit * s.stake_rate_rating;
  if (pr > rem) pr = rem;
  s.pool_action = pa;
  s.pool_rating = pr;
  while (s.pool_action + s.pool_rating > s.credit && s.pool_rating > 0.0) {
    s.pool_rating = std::nextafter(s.pool_rating, 0.0);
  }
}

void check_state(AgentId id, const AgentState& s) {
  const bool ok =
      s.credit >= 0.0 && s.pool_action >= 0.0 && s.pool_rating >= 0.0 &&
      s.pool_action + s.pool_rating <= s.credit && s.sr_a_cap >= 0.0 &&
      s.sr_a_cap <= 1.0 && s.stake_rate_action >= 0.0 &&
      s.stake_rate_action <= 1.0 && s.stake_rate_rating >= 0.0 &&
      s.stake_rate_rating <= 1.0 &&
      s.stake_rate_action + s.stake_rate_rating <= 1.0;
  if (!ok) {
    throw std::logic_error("ledger invariant broken for agent " +
                           std::to_string(id));
  }
}

double movement_step(const AgentParams& params, double rate, double delta) {
  // rate stays in [0, 1], so |rate| and |1 - rate| need no abs().
  return params.alpha_l * std::min({std::abs(delta), params.beta * rate,
                                    params.beta * (1.0 - rate)});
}

void check_update_inputs(const AgentParams& params, double rate,
                         double delta) {
  if (!(params.alpha_l >= 0.0 && params.alpha_l <= 1.0)) {
    fail_config("alpha_l must lie in [0, 1], got " +
                std::to_string(params.alpha_l));
  }
  if (!(params.beta > 0.0 && params.beta < 1.0)) {
    fail_config("beta must lie in (0, 1), got " + std::to_string(params.beta));
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    fail_config("staking rate must lie in [0, 1], got " + std::to_string(rate));
  }
  if (!std::isfinite(delta)) fail_config("settled delta must be finite");
}

ReplicationResult run_replication(const SimConfig& cfg, std::uint32_t r) {
  RngStream rng(cfg.seed, r);
  Population pop = init_population(cfg.population, rng);
  assign_learning_intensities(pop, cfg.mechanism, rng);

  ReplicationResult rep;
  rep.replication_index = r;
  rep.params = pop.params;
  rep.initial_states = pop.states;
  rep.rounds.reserve(cfg.rounds);
  for (std::uint32_t t = 0; t < cfg.rounds; ++t) {
    rep.rounds.push_back(run_round(pop, cfg.mechanism, t, rng));
  }
  rep.final_states = pop.states;

  rep.cumulative.resize(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    rep.cumulative[i].agent_id = static_cast<AgentId>(i);
  }
  for (const auto& round : rep.rounds) {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      rep.cumulative[i].d_action += round.deltas[i].d_action;
      rep.cumulative[i].d_rating += round.deltas[i].d_rating;
      rep.cumulative[i].d_externality += round.deltas[i].d_externality;
    }
  }

  const bool frozen = std::all_of(pop.params.begin(), pop.params.end(),
                                  [](const AgentParams& p) {
                                    return p.alpha_l == 0.0;
                                  });
  if (frozen) {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const AgentState& a = rep.initial_states[i];
      const AgentState& b = rep.final_states[i];
      if (std::memcmp(&a.stake_rate_action, &b.stake_rate_action,
                      sizeof(double)) != 0 ||
          std::memcmp(&a.stake_rate_rating, &b.stake_rate_rating,
                      sizeof(double)) != 0) {
        throw std::logic_error(
            "staking rates moved although every learning intensity is 0");
      }
    }
  }
  return rep;
}

}  // namespace

void PopulationConfig::validate() const {
  if (n == 0) fail_config("agents must be >= 1");
  if (!(cp_total > 0.0) || !std::isfinite(cp_total)) {
    fail_config("cp_total must be finite and > 0, got " +
                std::to_string(cp_total));
  }
  if (initial_distribution == InitialDistribution::power_law) {
    power_law.validate();
  }
  if (!std::isfinite(population_mu)) fail_config("population_mu must be finite");
  if (!(population_sigma > 0.0) || !std::isfinite(population_sigma)) {
    fail_config("population_sigma must be finite and > 0, got " +
                std::to_string(population_sigma));
  }
  if (!(within_agent_sigma > 0.0) || !std::isfinite(within_agent_sigma)) {
    fail_config("within_agent_sigma must be finite and > 0, got " +
                std::to_string(within_agent_sigma));
  }
}

void MechanismConfig::validate() const {
  require_unit_interval(p_skip_action, "p_skip_action");
  require_unit_interval(p_skip_rating, "p_skip_rating");
  if (ratings_per_rater == 0) fail_config("ratings_per_rater must be >= 1");
  require_unit_interval(alpha_l, "alpha_l");
  if (!(beta > 0.0 && beta < 1.0)) {
    fail_config("beta must lie in (0, 1), got " + std::to_string(beta));
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    fail_config("gamma must be finite and >= 0, got " + std::to_string(gamma));
  }
  if (externality_mode != ExternalityMode::none) {
    if (!(externality_mean > 0.0) || !std::isfinite(externality_mean)) {
      fail_config("externality_mean must be finite and > 0, got " +
                  std::to_string(externality_mean));
    }
  }
  require_unit_interval(contributor_fraction, "contributor_fraction");
  coeff.validate();
}

void SimConfig::validate() const {
  population.validate();
  mechanism.validate();
  if (replications == 0) fail_config("replications must be >= 1");
  if (jobs == 0) fail_config("jobs must be >= 1");
  if (bins < 2) fail_config("bins must be >= 2");
  if (out_dir.empty()) fail_config("out_dir must not be empty");
  const unsigned __int128 work = static_cast<unsigned __int128>(rounds) *
                                 population.n * replications;
  if (!override_safety && work > kAgentRoundSafetyLimit) {
    fail_config(
        "rounds * agents * replications exceeds the safety limit of 1e9 "
        "agent-rounds; pass override_safety to run anyway");
  }
}

Population init_population(const PopulationConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t n = cfg.n;
  Population pop;
  pop.params.resize(n);
  pop.states.resize(n);

  std::vector<double> credits;
  if (cfg.initial_distribution == InitialDistribution::uniform) {
    credits.assign(n, cfg.cp_total / static_cast<double>(n));
  } else {
    credits = sample_power_law(rng, cfg.power_law, n);
    const double sum = std::accumulate(credits.begin(), credits.end(), 0.0);
    const double scale = cfg.cp_total / sum;
    for (double& c : credits) c *= scale;
  }

  // Field-by-field draw order; one batch per field keeps streams auditable.
  for (std::size_t i = 0; i < n; ++i) {
    pop.states[i].sr_a_cap = rng.uniform01();
  }
  for (std::size_t i = 0; i < n; ++i) {
    pop.states[i].stake_rate_action = pop.states[i].sr_a_cap * rng.uniform01();
  }
  for (std::size_t i = 0; i < n; ++i) {
    pop.states[i].stake_rate_rating =
        (1.0 - pop.states[i].sr_a_cap) * rng.uniform01();
  }
  for (std::size_t i = 0; i < n; ++i) {
    pop.params[i].mu_i =
        sample_normal(rng, {cfg.population_mu, cfg.population_sigma});
  }

  for (std::size_t i = 0; i < n; ++i) {
    AgentParams& p = pop.params[i];
    p.agent_id = static_cast<AgentId>(i);
    p.sigma_i = cfg.within_agent_sigma;
    p.alpha_l = 0.0;

    AgentState& s = pop.states[i];
    s.credit = credits[i];
    while (s.stake_rate_action + s.stake_rate_rating > 1.0 &&
           s.stake_rate_rating > 0.0) {
      s.stake_rate_rating = std::nextafter(s.stake_rate_rating, 0.0);
    }
    replenish_pools(s);
    check_state(p.agent_id, s);
  }
  return pop;
}

void assign_learning_intensities(Population& pop, const MechanismConfig& cfg,
                                 RngStream& rng) {
  cfg.validate();
  for (auto& p : pop.params) p.beta = cfg.beta;
  switch (cfg.learning_mode) {
    case LearningMode::off:
      for (auto& p : pop.params) p.alpha_l = 0.0;
      break;
    case LearningMode::uniform:
      for (auto& p : pop.params) p.alpha_l = cfg.alpha_l;
      break;
    case LearningMode::random_per_agent:
      for (auto& p : pop.params) p.alpha_l = rng.uniform01();
      break;
    case LearningMode::stake_correlated:
      for (std::size_t i = 0; i < pop.size(); ++i) {
        pop.params[i].alpha_l =
            std::clamp(pop.states[i].stake_rate_action, 0.0, 1.0);
      }
      break;
  }
}

RoundParticipants select_round_participants(const Population& pop,
                                            const MechanismConfig& cfg,
                                            RngStream& rng) {
  cfg.validate();
  RoundParticipants out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (rng.uniform01() >= cfg.p_skip_action) {
      out.actors.push_back(static_cast<AgentId>(i));
    }
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (rng.uniform01() >= cfg.p_skip_rating) {
      out.raters.push_back(static_cast<AgentId>(i));
    }
  }
  return out;
}

std::vector<ActionStakeRecord> generate_actions(std::span<const AgentId> actors,
                                                const Population& pop) {
  std::vector<ActionStakeRecord> out;
  out.reserve(actors.size());
  for (AgentId id : actors) {
    const AgentState& s = pop.states[id];
    const double stake = s.stake_rate_action * s.pool_action;
    if (stake > 0.0) {
      out.push_back({id, static_cast<ActionId>(id), stake});
    }
  }
  return out;
}

std::vector<RatingStakeRecord> assign_ratings(
    std::span<const AgentId> raters,
    std::span<const ActionStakeRecord> actions, const Population& pop,
    const MechanismConfig& cfg, RngStream& rng) {
  cfg.validate();
  std::vector<RatingStakeRecord> out;
  if (raters.empty() || actions.empty()) return out;
  const std::size_t m = actions.size();

  std::vector<std::ptrdiff_t> own(pop.size(), -1);
  for (std::size_t idx = 0; idx < m; ++idx) {
    own[actions[idx].actor_id] = static_cast<std::ptrdiff_t>(idx);
  }

  std::vector<double> weight(m);
  std::vector<double> prefix(m);
  double total = 0.0;
  for (std::size_t idx = 0; idx < m; ++idx) {
    weight[idx] = cfg.consumer_selection ? actions[idx].stake : 1.0;
    total += weight[idx];
    prefix[idx] = total;
  }

  // Rating direction inputs. With per-action realization each action gets
  // one quality draw shared by all of its raters; with per-rater draws the
  // actor only fixes the probability of a negative outcome.
  std::vector<int> realized;
  std::vector<double> p_neg;
  if (cfg.rating_sign_mode == RatingSignMode::per_action_realization) {
    realized.resize(m);
    for (std::size_t idx = 0; idx < m; ++idx) {
      const AgentParams& actor = pop.params[actions[idx].actor_id];
      realized[idx] =
          sample_normal(rng, {actor.mu_i, actor.sigma_i}) < 0.0 ? -1 : +1;
    }
  } else {
    p_neg.resize(m);
    for (std::size_t idx = 0; idx < m; ++idx) {
      const AgentParams& actor = pop.params[actions[idx].actor_id];
      p_neg[idx] = negative_rating_probability({actor.mu_i, actor.sigma_i});
    }
  }

  std::vector<std::size_t> scratch;
  for (AgentId rater : raters) {
    const AgentState& s = pop.states[rater];
    const double magnitude = s.stake_rate_rating * s.pool_rating;
    if (!(magnitude > 0.0)) continue;  // zero-magnitude ratings are dropped

    const std::ptrdiff_t own_idx = own[rater];
    const std::size_t eligible = m - (own_idx >= 0 ? 1u : 0u);
    const std::size_t k =
        std::min<std::size_t>(cfg.ratings_per_rater, eligible);
    if (k == 0) continue;

    auto emit = [&](std::size_t idx) {
      const int sign =
          cfg.rating_sign_mode == RatingSignMode::per_action_realization
              ? realized[idx]
              : sample_rating_sign(rng, p_neg[idx]);
      out.push_back(
          {rater, actions[idx].action_id, static_cast<double>(sign) * magnitude});
    };

    if (k == 1) {
      const double own_w = own_idx >= 0 ? weight[own_idx] : 0.0;
      const double eff_total = total - own_w;
      if (!(eff_total > 0.0)) continue;
      double target = rng.uniform01() * eff_total;
      if (own_idx >= 0) {
        const double before_own = own_idx > 0 ? prefix[own_idx - 1] : 0.0;
        if (target >= before_own) target += own_w;
      }
      std::size_t idx = static_cast<std::size_t>(
          std::upper_bound(prefix.begin(), prefix.end(), target) -
          prefix.begin());
      if (idx >= m) idx = m - 1;
      if (static_cast<std::ptrdiff_t>(idx) == own_idx) {
        // rounding pushed the target into the excluded slot; step off it
        idx = idx + 1 < m ? idx + 1 : idx - 1;
      }
      emit(idx);
    } else {
      scratch.clear();
      double remaining = 0.0;
      for (std::size_t idx = 0; idx < m; ++idx) {
        if (static_cast<std::ptrdiff_t>(idx) == own_idx) continue;
        scratch.push_back(idx);
        remaining += weight[idx];
      }
      for (std::size_t t = 0; t < k && !scratch.empty(); ++t) {
        if (!(remaining > 0.0)) break;
        const double target = rng.uniform01() * remaining;
        double cum = 0.0;
        std::size_t pos = scratch.size() - 1;
        for (std::size_t j = 0; j < scratch.size(); ++j) {
          cum += weight[scratch[j]];
          if (target < cum) {
            pos = j;
            break;
          }
        }
        const std::size_t idx = scratch[pos];
        emit(idx);
        remaining -= weight[idx];
        scratch[pos] = scratch.back();
        scratch.pop_back();
      }
    }
  }
  return out;
}

double update_action_stake(const AgentParams& params, double stake_rate_action,
                           double d_action) {
  check_update_inputs(params, stake_rate_action, d_action);
  if (params.alpha_l == 0.0 || d_action == 0.0) return stake_rate_action;
  const double sign = d_action > 0.0 ? 1.0 : -1.0;
  const double step = movement_step(params, stake_rate_action, d_action);
  return std::clamp(stake_rate_action + sign * step, 0.0, 1.0);
}

double update_rating_stake(const AgentParams& params, double stake_rate_rating,
                           double d_rating, double new_stake_rate_action) {
  check_update_inputs(params, stake_rate_rating, d_rating);
  if (!(new_stake_rate_action >= 0.0 && new_stake_rate_action <= 1.0)) {
    fail_config("new_stake_rate_action must lie in [0, 1]");
  }
  // With a zero intensity nothing moves and the cap cannot newly bind,
  // since the action rate did not move either.
  if (params.alpha_l == 0.0) return stake_rate_rating;
  double tentative = stake_rate_rating;
  if (d_rating != 0.0) {
    const double sign = d_rating > 0.0 ? 1.0 : -1.0;
    const double step = movement_step(params, stake_rate_rating, d_rating);
    tentative = stake_rate_rating + sign * step;
  }
  const double cap = 1.0 - new_stake_rate_action;
  return std::clamp(std::min(cap, tentative), 0.0, 1.0);
}

RoundOutcome run_round(Population& pop, const MechanismConfig& cfg,
                       std::uint32_t round_index, RngStream& rng) {
  cfg.validate();
  const std::size_t n = pop.size();
  RoundOutcome out;
  out.round_index = round_index;

  const RoundParticipants sel = select_round_participants(pop, cfg, rng);
  out.events.actions = generate_actions(sel.actors, pop);
  out.events.ratings =
      assign_ratings(sel.raters, out.events.actions, pop, cfg, rng);

  std::vector<double> inflow(n, 0.0);
  if (cfg.externality_mode != ExternalityMode::none) {
    const std::size_t contributors = contributor_count(cfg, n);
    for (std::size_t i = 0; i < contributors; ++i) {
      inflow[i] = cfg.externality_mode == ExternalityMode::fixed
                      ? cfg.externality_mean
                      : sample_exponential(rng, cfg.externality_mean);
    }
  }

  std::vector<std::ptrdiff_t> action_of(n, -1);
  for (std::size_t idx = 0; idx < out.events.actions.size(); ++idx) {
    action_of[out.events.actions[idx].actor_id] =
        static_cast<std::ptrdiff_t>(idx);
  }
  std::vector<double> staked_a(n, 0.0);
  std::vector<double> staked_r(n, 0.0);
  for (const auto& a : out.events.actions) staked_a[a.actor_id] += a.stake;
  for (const auto& r : out.events.ratings) {
    staked_r[r.rater_id] += std::abs(r.signed_stake);
  }

  const bool learning = cfg.learning_mode != LearningMode::off;
  const GainCoefficients norm_coeff = GainCoefficients::self_normalized();
  std::vector<double> norm_a(n, 0.0);
  std::vector<double> norm_r(n, 0.0);
  out.deltas.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    std::span<const ActionStakeRecord> mine;
    if (action_of[i] >= 0) {
      mine = {&out.events.actions[static_cast<std::size_t>(action_of[i])], 1};
    }
    const AgentId id = static_cast<AgentId>(i);
    CreditDelta d = settle_agent(id, mine, out.events.ratings, cfg.coeff,
                                 cfg.gamma, inflow[i]);
    if (learning) {
      CreditDelta nd = d;
      if (cfg.coeff.mode != GainMode::self_normalized) {
        nd = settle_agent(id, mine, out.events.ratings, norm_coeff, 0.0, 0.0);
      }
      norm_a[i] = staked_a[i] > 0.0 ? nd.d_action / staked_a[i] : 0.0;
      norm_r[i] = staked_r[i] > 0.0 ? nd.d_rating / staked_r[i] : 0.0;
    }

    AgentState& s = pop.states[i];
    d.d_action =
        clamp_to_pool(d.d_action, std::min(s.pool_action, staked_a[i]));
    d.d_rating =
        clamp_to_pool(d.d_rating, std::min(s.pool_rating, staked_r[i]));
    out.deltas[i] = d;
  }

  for (std::size_t i = 0; i < n; ++i) {
    AgentState& s = pop.states[i];
    const CreditDelta& d = out.deltas[i];
    s.pool_action += d.d_action;
    s.pool_rating += d.d_rating;
    double credit = s.credit + (d.d_action + d.d_rating + d.d_externality);
    if (credit < 0.0) {
      if (credit < -1e-9 * (1.0 + s.credit)) {
        throw std::logic_error("credit of agent " + std::to_string(i) +
                               " went negative: " + std::to_string(credit));
      }
      credit = 0.0;  // clamp losses can undershoot by rounding residue only
    }
    s.credit = credit;
  }

  for (std::size_t i = 0; i < n; ++i) {
    AgentState& s = pop.states[i];
    const double new_sa =
        update_action_stake(pop.params[i], s.stake_rate_action, norm_a[i]);
    double new_sr = update_rating_stake(pop.params[i], s.stake_rate_rating,
                                        norm_r[i], new_sa);
    while (new_sa + new_sr > 1.0 && new_sr > 0.0) {
      new_sr = std::nextafter(new_sr, 0.0);
    }
    s.stake_rate_action = new_sa;
    s.stake_rate_rating = new_sr;
    replenish_pools(s);
    check_state(pop.params[i].agent_id, s);
  }

  out.snapshots.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentState& s = pop.states[i];
    out.snapshots[i] = {s.credit, s.stake_rate_action, s.stake_rate_rating};
  }
  return out;
}

SimulationResult run_simulation(const SimConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  result.config = cfg;
  result.replications.resize(cfg.replications);

  std::atomic<std::uint32_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::uint32_t r = next.fetch_add(1);
      if (r >= cfg.replications) return;
      try {
        result.replications[r] = run_replication(cfg, r);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::uint32_t jobs = std::min(cfg.jobs, cfg.replications);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (std::uint32_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

}  // namespace repsim
