#include "repsim/mechanics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace repsim {

namespace {

void check_action_record(const ActionStakeRecord& a) {
  if (!(a.stake > 0.0) || !std::isfinite(a.stake)) {
    throw std::invalid_argument("action record of agent " +
                                std::to_string(a.actor_id) +
                                " must carry a finite positive stake");
  }
}

void check_rating_record(const RatingStakeRecord& r) {
  if (r.signed_stake == 0.0 || !std::isfinite(r.signed_stake)) {
    throw std::invalid_argument("rating record of agent " +
                                std::to_string(r.rater_id) +
                                " must carry a finite nonzero stake");
  }
}

// Small rounds keep these sets tiny, so linear lookup beats hashing.
const ActionStakeRecord* find_action(
    std::span<const ActionStakeRecord> actions, ActionId id) {
  for (const auto& a : actions) {
    if (a.action_id == id) return &a;
  }
  return nullptr;
}

}  // namespace

void GainCoefficients::validate() const {
  if (mode == GainMode::raw) {
    if (!(c_r2a >= 0.0) || !std::isfinite(c_r2a) || !(c_r2r >= 0.0) ||
        !std::isfinite(c_r2r)) {
      throw std::invalid_argument(
          "raw gain coefficients must be finite and >= 0");
    }
  }
}

double action_gain(std::span<const ActionStakeRecord> actions_of_agent,
                   std::span<const RatingStakeRecord> ratings_on_them,
                   const GainCoefficients& coeff) {
  coeff.validate();
  for (const auto& a : actions_of_agent) check_action_record(a);

  double num = 0.0;
  double den = 0.0;
  for (const auto& r : ratings_on_them) {
    check_rating_record(r);
    const ActionStakeRecord* a = find_action(actions_of_agent, r.action_id);
    if (a == nullptr) {
      throw std::runtime_error("rating by agent " +
                               std::to_string(r.rater_id) +
                               " references an action not owned by the agent");
    }
    if (r.rater_id == a->actor_id) {
      throw std::runtime_error("agent " + std::to_string(r.rater_id) +
                               " rated its own action");
    }
    const double term = a->stake * r.signed_stake;
    num += term;
    den += std::abs(term);
  }
  if (coeff.mode == GainMode::raw) return coeff.c_r2a * num;
  return den > 0.0 ? num / den : 0.0;
}

double rating_cross_gain(std::span<const RatingStakeRecord> ratings_by_agent,
                         std::span<const RatingStakeRecord> co_ratings,
                         const GainCoefficients& coeff) {
  coeff.validate();
  if (ratings_by_agent.empty()) {
    if (!co_ratings.empty()) {
      throw std::runtime_error(
          "co-ratings supplied for an agent that rated nothing");
    }
    return 0.0;
  }

  const AgentId agent = ratings_by_agent.front().rater_id;
  for (const auto& r : ratings_by_agent) {
    check_rating_record(r);
    if (r.rater_id != agent) {
      throw std::invalid_argument(
          "ratings_by_agent mixes records of different raters");
    }
    for (const auto& other : ratings_by_agent) {
      if (&other != &r && other.action_id == r.action_id) {
        throw std::invalid_argument("agent " + std::to_string(agent) +
                                    " holds duplicate ratings on one action");
      }
    }
  }

  double num = 0.0;
  double den = 0.0;
  for (const auto& c : co_ratings) {
    check_rating_record(c);
    if (c.rater_id == agent) {
      throw std::runtime_error("co-rating set contains the agent's own record");
    }
    const RatingStakeRecord* mine = nullptr;
    for (const auto& r : ratings_by_agent) {
      if (r.action_id == c.action_id) {
        mine = &r;
        break;
      }
    }
    if (mine == nullptr) {
      throw std::runtime_error(
          "co-rating references an action the agent did not rate");
    }
    const double term = mine->signed_stake * c.signed_stake;
    num += term;
    den += std::abs(term);
  }
  if (coeff.mode == GainMode::raw) return coeff.c_r2r * num;
  return den > 0.0 ? num / den : 0.0;
}

CreditDelta settle_agent(AgentId agent_id,
                         std::span<const ActionStakeRecord> actions_of_agent,
                         std::span<const RatingStakeRecord> all_ratings,
                         const GainCoefficients& coeff, double gamma,
                         double externality) {
  coeff.validate();
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be finite and >= 0");
  }
  if (!(externality >= 0.0) || !std::isfinite(externality)) {
    throw std::invalid_argument("externality must be finite and >= 0");
  }
  for (const auto& a : actions_of_agent) {
    if (a.actor_id != agent_id) {
      throw std::invalid_argument("action of agent " +
                                  std::to_string(a.actor_id) +
                                  " passed to settlement of agent " +
                                  std::to_string(agent_id));
    }
  }

  std::vector<RatingStakeRecord> on_mine;
  std::vector<RatingStakeRecord> by_me;
  for (const auto& r : all_ratings) {
    if (r.rater_id == agent_id) {
      by_me.push_back(r);
    } else if (find_action(actions_of_agent, r.action_id) != nullptr) {
      on_mine.push_back(r);
    }
  }
  std::vector<RatingStakeRecord> co;
  if (!by_me.empty()) {
    for (const auto& r : all_ratings) {
      if (r.rater_id == agent_id) continue;
      for (const auto& mine : by_me) {
        if (mine.action_id == r.action_id) {
          co.push_back(r);
          break;
        }
      }
    }
  }

  CreditDelta delta;
  delta.agent_id = agent_id;
  delta.d_action = action_gain(actions_of_agent, on_mine, coeff);
  delta.d_rating = rating_cross_gain(by_me, co, coeff);
  if (coeff.mode == GainMode::self_normalized) {
    double staked_actions = 0.0;
    for (const auto& a : actions_of_agent) staked_actions += a.stake;
    double staked_ratings = 0.0;
    for (const auto& r : by_me) staked_ratings += std::abs(r.signed_stake);
    delta.d_action *= staked_actions;
    delta.d_rating *= staked_ratings;
  }
  delta.d_externality = gamma * externality;
  return delta;
}

double clamp_to_pool(double delta, double pool) {
  if (!(pool >= 0.0) || !std::isfinite(pool)) {
    throw std::invalid_argument("pool must be finite and >= 0, got " +
                                std::to_string(pool));
  }
  return delta < -pool ? -pool : delta;
}

AlignmentProbabilities alignment_probabilities(double p_plus) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
    throw std::invalid_argument("p_plus must lie in [0, 1], got " +
                                std::to_string(p_plus));
  }
  const double q = 1.0 - p_plus;
  return {p_plus * p_plus + q * q, 2.0 * p_plus * q};
}

}  // namespace repsim
