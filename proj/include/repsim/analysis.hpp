#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repsim/engine.hpp"

namespace repsim {

// Co-rater agreement pooled over every action that received at least two
// ratings. analytic_p_align is derived from the empirical positive-rating
// share, so the two columns are directly comparable.
struct AlignmentReport {
  std::uint64_t pairs_total = 0;
  std::uint64_t pairs_aligned = 0;
  std::optional<double> empirical_p_align;
  std::optional<double> analytic_p_align;
};

AlignmentReport alignment_report(std::span<const RoundEvents> events);
AlignmentReport alignment_report(const ReplicationResult& rep);
AlignmentReport alignment_report(const SimulationResult& result);

enum class BinAxis { stake_rate_action, stake_rate_rating, learning_intensity };
enum class BinBasis { initial, final_value };

// Per-agent cumulative deltas bucketed by an axis value in [0, 1].
// Action-staking and learning-intensity axes summarize the action channel,
// the rating axis the rating channel. Replications are pooled, so counts
// sum to agents * replications.
struct BinnedSummary {
  BinAxis axis = BinAxis::stake_rate_action;
  BinBasis basis = BinBasis::final_value;
  std::vector<double> bin_edges;        // n_bins + 1 ascending edges over [0,1]
  std::vector<std::uint64_t> counts;
  std::vector<double> mean_delta;       // NaN for empty bins
  std::vector<double> var_delta;        // sample variance; NaN for empty bins
};

BinnedSummary binned_delta_summary(const SimulationResult& result, BinAxis axis,
                                   BinBasis basis, std::size_t n_bins);

// Spearman rank correlation with average ranks on ties. Empty when either
// input is constant, since the coefficient is undefined there.
std::optional<double> rank_correlation(std::span<const double> x,
                                       std::span<const double> y);

// Writes trajectories.csv, agents.csv, alignment.csv, one file per binned
// summary and run_meta.txt into out_dir. All writes go to a temp file first
// and are renamed into place, so readers never observe partial tables.
// Returns the paths written.
std::vector<std::filesystem::path> export_tables(
    const SimulationResult& result, const AlignmentReport& alignment,
    std::span<const BinnedSummary> binned, const std::string& run_meta_text,
    const std::filesystem::path& out_dir);

// 9 significant digits, '.' separator; the one number format used in tables.
std::string format_number(double v);

// Temp-file-plus-rename write used for every table; exposed for the other
// deterministic outputs (sweep index).
void write_text_file_atomic(const std::filesystem::path& out_dir,
                            const std::string& name,
                            const std::string& content);

}  // namespace repsim
