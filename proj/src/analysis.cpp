#include "repsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace repsim {

namespace fs = std::filesystem;

namespace {

struct AlignmentTally {
  std::uint64_t pairs = 0;
  std::uint64_t aligned = 0;
  std::uint64_t positive = 0;
  std::uint64_t ratings = 0;
};

void accumulate_alignment(const RoundEvents& events, AlignmentTally& tally) {
  std::unordered_map<ActionId, std::pair<std::uint64_t, std::uint64_t>> group;
  for (const auto& r : events.ratings) {
    auto& [pos, neg] = group[r.action_id];
    if (r.signed_stake > 0.0) {
      ++pos;
      ++tally.positive;
    } else {
      ++neg;
    }
    ++tally.ratings;
  }
  for (const auto& [id, counts] : group) {
    const std::uint64_t p = counts.first;
    const std::uint64_t q = counts.second;
    const std::uint64_t k = p + q;
    tally.pairs += k * (k - 1) / 2;
    tally.aligned += p * (p - 1) / 2 + q * (q - 1) / 2;
  }
}

AlignmentReport finish_alignment(const AlignmentTally& tally) {
  AlignmentReport report;
  report.pairs_total = tally.pairs;
  report.pairs_aligned = tally.aligned;
  if (tally.pairs > 0) {
    report.empirical_p_align = static_cast<double>(tally.aligned) /
                               static_cast<double>(tally.pairs);
    const double p_plus = static_cast<double>(tally.positive) /
                          static_cast<double>(tally.ratings);
    report.analytic_p_align = alignment_probabilities(p_plus).p_align;
  }
  return report;
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = static_cast<double>(i + j + 2) / 2.0;  // 1-based
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::string binned_file_name(const BinnedSummary& summary) {
  std::string name = "binned_";
  switch (summary.axis) {
    case BinAxis::stake_rate_action:
      name += "stake_rate_action";
      break;
    case BinAxis::stake_rate_rating:
      name += "stake_rate_rating";
      break;
    case BinAxis::learning_intensity:
      name += "learning_intensity";
      break;
  }
  if (summary.basis == BinBasis::initial) name += "_initial";
  return name + ".csv";
}

void append_field(std::string& row, double v) {
  row += format_number(v);
}

}  // namespace

void write_text_file_atomic(const fs::path& out_dir, const std::string& name,
                            const std::string& content) {
  fs::create_directories(out_dir);
  const fs::path tmp = out_dir / (name + ".tmp");
  const fs::path final_path = out_dir / name;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

AlignmentReport alignment_report(std::span<const RoundEvents> events) {
  AlignmentTally tally;
  for (const auto& ev : events) accumulate_alignment(ev, tally);
  return finish_alignment(tally);
}

AlignmentReport alignment_report(const ReplicationResult& rep) {
  AlignmentTally tally;
  for (const auto& round : rep.rounds) {
    accumulate_alignment(round.events, tally);
  }
  return finish_alignment(tally);
}

AlignmentReport alignment_report(const SimulationResult& result) {
  AlignmentTally tally;
  for (const auto& rep : result.replications) {
    for (const auto& round : rep.rounds) {
      accumulate_alignment(round.events, tally);
    }
  }
  return finish_alignment(tally);
}

BinnedSummary binned_delta_summary(const SimulationResult& result, BinAxis axis,
                                   BinBasis basis, std::size_t n_bins) {
  if (n_bins == 0) {
    throw std::invalid_argument("binned_delta_summary: n_bins must be >= 1");
  }
  BinnedSummary summary;
  summary.axis = axis;
  summary.basis = basis;
  summary.bin_edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    summary.bin_edges[i] =
        static_cast<double>(i) / static_cast<double>(n_bins);
  }
  summary.counts.assign(n_bins, 0);
  summary.mean_delta.assign(n_bins, 0.0);
  std::vector<double> m2(n_bins, 0.0);

  for (const auto& rep : result.replications) {
    const std::size_t n = rep.params.size();
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      switch (axis) {
        case BinAxis::stake_rate_action:
          v = (basis == BinBasis::initial ? rep.initial_states[i]
                                          : rep.final_states[i])
                  .stake_rate_action;
          break;
        case BinAxis::stake_rate_rating:
          v = (basis == BinBasis::initial ? rep.initial_states[i]
                                          : rep.final_states[i])
                  .stake_rate_rating;
          break;
        case BinAxis::learning_intensity:
          v = rep.params[i].alpha_l;
          break;
      }
      const double delta = axis == BinAxis::stake_rate_rating
                               ? rep.cumulative[i].d_rating
                               : rep.cumulative[i].d_action;
      v = std::clamp(v, 0.0, 1.0);
      std::size_t bin = static_cast<std::size_t>(
          v * static_cast<double>(n_bins));
      if (bin >= n_bins) bin = n_bins - 1;

      const double count = static_cast<double>(++summary.counts[bin]);
      const double d1 = delta - summary.mean_delta[bin];
      summary.mean_delta[bin] += d1 / count;
      m2[bin] += d1 * (delta - summary.mean_delta[bin]);
    }
  }

  summary.var_delta.assign(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (summary.counts[b] == 0) {
      summary.mean_delta[b] = std::numeric_limits<double>::quiet_NaN();
      summary.var_delta[b] = std::numeric_limits<double>::quiet_NaN();
    } else if (summary.counts[b] > 1) {
      summary.var_delta[b] =
          m2[b] / static_cast<double>(summary.counts[b] - 1);
    }
  }
  return summary;
}

std::optional<double> rank_correlation(std::span<const double> x,
                                       std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("rank_correlation: input sizes differ");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("rank_correlation: need at least 2 points");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;

  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input
  return sxy / std::sqrt(sxx * syy);
}

std::vector<fs::path> export_tables(const SimulationResult& result,
                                    const AlignmentReport& alignment,
                                    std::span<const BinnedSummary> binned,
                                    const std::string& run_meta_text,
                                    const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  {
    std::string csv =
        "replication,round,agent_id,credit,stake_rate_action,"
        "stake_rate_rating,d_action,d_rating,d_externality\n";
    std::size_t rows = 0;
    for (const auto& rep : result.replications) rows += rep.rounds.size();
    csv.reserve(csv.size() + rows * result.config.population.n * 72);
    for (const auto& rep : result.replications) {
      for (const auto& round : rep.rounds) {
        for (std::size_t i = 0; i < round.deltas.size(); ++i) {
          csv += std::to_string(rep.replication_index);
          csv += ',';
          csv += std::to_string(round.round_index);
          csv += ',';
          csv += std::to_string(i);
          csv += ',';
          append_field(csv, round.snapshots[i].credit);
          csv += ',';
          append_field(csv, round.snapshots[i].stake_rate_action);
          csv += ',';
          append_field(csv, round.snapshots[i].stake_rate_rating);
          csv += ',';
          append_field(csv, round.deltas[i].d_action);
          csv += ',';
          append_field(csv, round.deltas[i].d_rating);
          csv += ',';
          append_field(csv, round.deltas[i].d_externality);
          csv += '\n';
        }
      }
    }
    write_text_file_atomic(out_dir, "trajectories.csv", csv);
    written.push_back(out_dir / "trajectories.csv");
  }

  {
    // Rows are grouped by replication, in replication order.
    std::string csv =
        "agent_id,mu_i,sigma_i,alpha_l,initial_credit,final_credit,"
        "final_stake_rate_action,final_stake_rate_rating,cum_d_action,"
        "cum_d_rating,cum_d_externality\n";
    for (const auto& rep : result.replications) {
      for (std::size_t i = 0; i < rep.params.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        append_field(csv, rep.params[i].mu_i);
        csv += ',';
        append_field(csv, rep.params[i].sigma_i);
        csv += ',';
        append_field(csv, rep.params[i].alpha_l);
        csv += ',';
        append_field(csv, rep.initial_states[i].credit);
        csv += ',';
        append_field(csv, rep.final_states[i].credit);
        csv += ',';
        append_field(csv, rep.final_states[i].stake_rate_action);
        csv += ',';
        append_field(csv, rep.final_states[i].stake_rate_rating);
        csv += ',';
        append_field(csv, rep.cumulative[i].d_action);
        csv += ',';
        append_field(csv, rep.cumulative[i].d_rating);
        csv += ',';
        append_field(csv, rep.cumulative[i].d_externality);
        csv += '\n';
      }
    }
    write_text_file_atomic(out_dir, "agents.csv", csv);
    written.push_back(out_dir / "agents.csv");
  }

  for (const auto& summary : binned) {
    std::string csv = "bin_lo,bin_hi,count,mean_delta,var_delta\n";
    const std::size_t n_bins = summary.counts.size();
    for (std::size_t b = 0; b < n_bins; ++b) {
      append_field(csv, summary.bin_edges[b]);
      csv += ',';
      append_field(csv, summary.bin_edges[b + 1]);
      csv += ',';
      csv += std::to_string(summary.counts[b]);
      csv += ',';
      if (summary.counts[b] > 0) append_field(csv, summary.mean_delta[b]);
      csv += ',';
      if (summary.counts[b] > 0) append_field(csv, summary.var_delta[b]);
      csv += '\n';
    }
    const std::string name = binned_file_name(summary);
    write_text_file_atomic(out_dir, name, csv);
    written.push_back(out_dir / name);
  }

  {
    std::string csv = "pairs_total,pairs_aligned,empirical_p_align,analytic_p_align\n";
    csv += std::to_string(alignment.pairs_total);
    csv += ',';
    csv += std::to_string(alignment.pairs_aligned);
    csv += ',';
    if (alignment.empirical_p_align) {
      append_field(csv, *alignment.empirical_p_align);
    }
    csv += ',';
    if (alignment.analytic_p_align) {
      append_field(csv, *alignment.analytic_p_align);
    }
    csv += '\n';
    write_text_file_atomic(out_dir, "alignment.csv", csv);
    written.push_back(out_dir / "alignment.csv");
  }

  write_text_file_atomic(out_dir, "run_meta.txt", run_meta_text);
  written.push_back(out_dir / "run_meta.txt");
  return written;
}

}  // namespace repsim
