#include "repsim/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace repsim {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) fail("trailing characters after number");
    return v;
  } catch (const std::exception&) {
    fail("key " + key + " expects a number, got '" + value + "'");
  }
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T v{};
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    fail("key " + key + " expects a nonnegative integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  fail("key " + key + " expects true/false, got '" + value + "'");
}

double parse_bounded(const std::string& key, const std::string& value,
                     double lo, double hi, bool open) {
  const double v = parse_double(key, value);
  const bool ok = open ? (v > lo && v < hi) : (v >= lo && v <= hi);
  if (!ok) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s must lie in %s%g, %g%s, got %g",
                  key.c_str(), open ? "(" : "[", lo, hi, open ? ")" : "]", v);
    fail(buf);
  }
  return v;
}

double parse_nonnegative(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (!(v >= 0.0)) fail(key + " must be >= 0, got " + value);
  return v;
}

double parse_positive(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (!(v > 0.0)) fail(key + " must be > 0, got " + value);
  return v;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* to_string(InitialDistribution d) {
  return d == InitialDistribution::uniform ? "uniform" : "power_law";
}

const char* to_string(LearningMode m) {
  switch (m) {
    case LearningMode::off: return "off";
    case LearningMode::uniform: return "uniform";
    case LearningMode::random_per_agent: return "random_per_agent";
    case LearningMode::stake_correlated: return "stake_correlated";
  }
  return "off";
}

const char* to_string(ExternalityMode m) {
  switch (m) {
    case ExternalityMode::none: return "none";
    case ExternalityMode::exponential: return "exponential";
    case ExternalityMode::fixed: return "fixed";
  }
  return "none";
}

const char* to_string(RatingSignMode m) {
  return m == RatingSignMode::per_rater_bernoulli ? "per_rater_bernoulli"
                                                  : "per_action_realization";
}

const char* to_string(GainMode m) {
  return m == GainMode::raw ? "raw" : "self_normalized";
}

}  // namespace

SimConfig default_sim_config() { return SimConfig{}; }

void set_config_key(SimConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "agents") {
    cfg.population.n = parse_unsigned<std::uint32_t>(key, value);
    if (cfg.population.n == 0) fail("agents must be >= 1");
  } else if (key == "cp_total") {
    cfg.population.cp_total = parse_positive(key, value);
  } else if (key == "initial_distribution") {
    if (value == "uniform") {
      cfg.population.initial_distribution = InitialDistribution::uniform;
    } else if (value == "power_law") {
      cfg.population.initial_distribution = InitialDistribution::power_law;
    } else {
      fail("initial_distribution must be uniform or power_law, got '" + value +
           "'");
    }
  } else if (key == "power_law_x_min") {
    cfg.population.power_law.x_min = parse_positive(key, value);
  } else if (key == "power_law_alpha") {
    const double v = parse_double(key, value);
    if (!(v > 1.0)) fail("power_law_alpha must be > 1, got " + value);
    cfg.population.power_law.alpha = v;
  } else if (key == "population_mu") {
    cfg.population.population_mu = parse_double(key, value);
  } else if (key == "population_sigma") {
    cfg.population.population_sigma = parse_positive(key, value);
  } else if (key == "within_agent_sigma") {
    cfg.population.within_agent_sigma = parse_positive(key, value);
  } else if (key == "p_skip_action") {
    cfg.mechanism.p_skip_action = parse_bounded(key, value, 0.0, 1.0, false);
  } else if (key == "p_skip_rating") {
    cfg.mechanism.p_skip_rating = parse_bounded(key, value, 0.0, 1.0, false);
  } else if (key == "consumer_selection") {
    cfg.mechanism.consumer_selection = parse_bool(key, value);
  } else if (key == "ratings_per_rater") {
    cfg.mechanism.ratings_per_rater = parse_unsigned<std::uint32_t>(key, value);
    if (cfg.mechanism.ratings_per_rater == 0) {
      fail("ratings_per_rater must be >= 1");
    }
  } else if (key == "learning_mode") {
    if (value == "off") {
      cfg.mechanism.learning_mode = LearningMode::off;
    } else if (value == "uniform") {
      cfg.mechanism.learning_mode = LearningMode::uniform;
    } else if (value == "random_per_agent") {
      cfg.mechanism.learning_mode = LearningMode::random_per_agent;
    } else if (value == "stake_correlated") {
      cfg.mechanism.learning_mode = LearningMode::stake_correlated;
    } else {
      fail("learning_mode must be off, uniform, random_per_agent or "
           "stake_correlated, got '" +
           value + "'");
    }
  } else if (key == "alpha_l") {
    cfg.mechanism.alpha_l = parse_bounded(key, value, 0.0, 1.0, false);
  } else if (key == "beta") {
    cfg.mechanism.beta = parse_bounded(key, value, 0.0, 1.0, true);
  } else if (key == "gamma") {
    cfg.mechanism.gamma = parse_nonnegative(key, value);
  } else if (key == "externality_mode") {
    if (value == "none") {
      cfg.mechanism.externality_mode = ExternalityMode::none;
    } else if (value == "exponential") {
      cfg.mechanism.externality_mode = ExternalityMode::exponential;
    } else if (value == "fixed") {
      cfg.mechanism.externality_mode = ExternalityMode::fixed;
    } else {
      fail("externality_mode must be none, exponential or fixed, got '" +
           value + "'");
    }
  } else if (key == "externality_mean") {
    cfg.mechanism.externality_mean = parse_nonnegative(key, value);
  } else if (key == "contributor_fraction") {
    cfg.mechanism.contributor_fraction =
        parse_bounded(key, value, 0.0, 1.0, false);
  } else if (key == "coeff_mode") {
    if (value == "raw") {
      cfg.mechanism.coeff.mode = GainMode::raw;
    } else if (value == "self_normalized") {
      cfg.mechanism.coeff.mode = GainMode::self_normalized;
    } else {
      fail("coeff_mode must be raw or self_normalized, got '" + value + "'");
    }
  } else if (key == "c_r2a") {
    cfg.mechanism.coeff.c_r2a = parse_nonnegative(key, value);
  } else if (key == "c_r2r") {
    cfg.mechanism.coeff.c_r2r = parse_nonnegative(key, value);
  } else if (key == "rating_sign_mode") {
    if (value == "per_rater_bernoulli") {
      cfg.mechanism.rating_sign_mode = RatingSignMode::per_rater_bernoulli;
    } else if (value == "per_action_realization") {
      cfg.mechanism.rating_sign_mode = RatingSignMode::per_action_realization;
    } else {
      fail("rating_sign_mode must be per_rater_bernoulli or "
           "per_action_realization, got '" +
           value + "'");
    }
  } else if (key == "rounds") {
    cfg.rounds = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "replications") {
    cfg.replications = parse_unsigned<std::uint32_t>(key, value);
    if (cfg.replications == 0) fail("replications must be >= 1");
  } else if (key == "seed") {
    cfg.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "out_dir") {
    if (value.empty()) fail("out_dir must not be empty");
    cfg.out_dir = value;
  } else if (key == "jobs") {
    cfg.jobs = parse_unsigned<std::uint32_t>(key, value);
    if (cfg.jobs == 0) fail("jobs must be >= 1");
  } else if (key == "bins") {
    cfg.bins = parse_unsigned<std::uint32_t>(key, value);
    if (cfg.bins < 2) fail("bins must be >= 2");
  } else if (key == "override_safety") {
    cfg.override_safety = parse_bool(key, value);
  } else {
    fail("unknown config key: " + key);
  }
}

bool is_sweepable_key(const std::string& key) {
  static const std::set<std::string> sweepable = {
      "cp_total",         "power_law_x_min",  "power_law_alpha",
      "population_mu",    "population_sigma", "within_agent_sigma",
      "p_skip_action",    "p_skip_rating",    "alpha_l",
      "beta",             "gamma",            "externality_mean",
      "contributor_fraction", "c_r2a",        "c_r2r"};
  return sweepable.count(key) > 0;
}

SimConfig parse_config(const std::string& source, const SimConfig& base,
                       bool allow_defaults) {
  SimConfig cfg = base;
  std::set<std::string> seen;
  std::istringstream in(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail("line " + std::to_string(line_no) +
           ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail("line " + std::to_string(line_no) + ": empty key");
    }
    if (value.empty()) {
      fail("line " + std::to_string(line_no) + ": empty value for key " + key);
    }
    set_config_key(cfg, key, value);
    seen.insert(key);
  }
  if (!allow_defaults) {
    for (const char* required : {"agents", "rounds", "replications", "seed"}) {
      if (seen.count(required) == 0) {
        fail(std::string("missing required key: ") + required);
      }
    }
  }
  return cfg;
}

std::string serialize_config(const SimConfig& cfg) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("agents", std::to_string(cfg.population.n));
  line("cp_total", fmt_double(cfg.population.cp_total));
  line("initial_distribution", to_string(cfg.population.initial_distribution));
  line("power_law_x_min", fmt_double(cfg.population.power_law.x_min));
  line("power_law_alpha", fmt_double(cfg.population.power_law.alpha));
  line("population_mu", fmt_double(cfg.population.population_mu));
  line("population_sigma", fmt_double(cfg.population.population_sigma));
  line("within_agent_sigma", fmt_double(cfg.population.within_agent_sigma));
  line("p_skip_action", fmt_double(cfg.mechanism.p_skip_action));
  line("p_skip_rating", fmt_double(cfg.mechanism.p_skip_rating));
  line("consumer_selection",
       cfg.mechanism.consumer_selection ? "true" : "false");
  line("ratings_per_rater", std::to_string(cfg.mechanism.ratings_per_rater));
  line("learning_mode", to_string(cfg.mechanism.learning_mode));
  line("alpha_l", fmt_double(cfg.mechanism.alpha_l));
  line("beta", fmt_double(cfg.mechanism.beta));
  line("gamma", fmt_double(cfg.mechanism.gamma));
  line("externality_mode", to_string(cfg.mechanism.externality_mode));
  line("externality_mean", fmt_double(cfg.mechanism.externality_mean));
  line("contributor_fraction",
       fmt_double(cfg.mechanism.contributor_fraction));
  line("coeff_mode", to_string(cfg.mechanism.coeff.mode));
  line("c_r2a", fmt_double(cfg.mechanism.coeff.c_r2a));
  line("c_r2r", fmt_double(cfg.mechanism.coeff.c_r2r));
  line("rating_sign_mode", to_string(cfg.mechanism.rating_sign_mode));
  line("rounds", std::to_string(cfg.rounds));
  line("replications", std::to_string(cfg.replications));
  line("seed", std::to_string(cfg.seed));
  line("out_dir", cfg.out_dir);
  line("jobs", std::to_string(cfg.jobs));
  line("bins", std::to_string(cfg.bins));
  line("override_safety", cfg.override_safety ? "true" : "false");
  return out;
}

std::string run_meta_text(const SimConfig& cfg) {
  // Comment header keeps the body a valid config file.
  std::string out;
  out += "# ";
  out += kToolName;
  out += ' ';
  out += kToolVersion;
  out += " run metadata\n";
  out += "# rng = ";
  out += kRngId;
  out += '\n';
  out += serialize_config(cfg);
  return out;
}

SimConfig preset_config(const std::string& name) {
  SimConfig cfg = default_sim_config();
  auto learning_uniform = [&cfg]() {
    cfg.mechanism.learning_mode = LearningMode::uniform;
    cfg.mechanism.alpha_l = 0.5;
  };
  if (name == "figure2") {
  } else if (name == "figure3") {
    learning_uniform();
  } else if (name == "figure4") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
  } else if (name == "figure5") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
    learning_uniform();
  } else if (name == "figure6") {
    cfg.mechanism.learning_mode = LearningMode::random_per_agent;
  } else if (name == "figure7") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
    cfg.mechanism.learning_mode = LearningMode::random_per_agent;
  } else if (name == "figure8") {
    cfg.mechanism.learning_mode = LearningMode::stake_correlated;
  } else if (name == "figure9") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
    cfg.mechanism.learning_mode = LearningMode::stake_correlated;
  } else if (name == "figure10") {
    cfg.mechanism.consumer_selection = true;
  } else if (name == "figure11") {
    cfg.mechanism.consumer_selection = true;
    learning_uniform();
  } else if (name == "figure12") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
    cfg.mechanism.consumer_selection = true;
  } else if (name == "figure13") {
    cfg.population.initial_distribution = InitialDistribution::power_law;
    cfg.mechanism.consumer_selection = true;
    learning_uniform();
  } else {
    fail("unknown preset: " + name);
  }
  cfg.out_dir = "out/" + name;
  return cfg;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (int i = 2; i <= 13; ++i) names.push_back("figure" + std::to_string(i));
  return names;
}

}  // namespace repsim
