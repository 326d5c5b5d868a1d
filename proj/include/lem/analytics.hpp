#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lem/sim.hpp"
#include "lem/vocab.hpp"

namespace lem {

struct TeamExpectation {
  std::string team;
  double expected_points = 0.0;  // per home match
};

struct LeagueRow {
  std::string team;
  double exp_points_per_match = 0.0;
  double exp_season_points = 0.0;  // 19 home fixtures
  int exp_rank = 0;
  int ref_rank = 0;
  int displacement = 0;
};

struct LeagueProjection {
  std::vector<LeagueRow> rows;  // sorted by exp_rank
  double avg_displacement = 0.0;
  double topk_avg_displacement = 0.0;
  int top_k = 6;
};

constexpr int kHomeFixturesPerSeason = 19;

// Ranks teams by expected points (descending, ties by team label) and scores
// the ranking against the reference table. Displacement is the absolute rank
// difference; the top-k average covers the k best expected ranks.
LeagueProjection project_league(std::vector<TeamExpectation> teams,
                                const std::map<std::string, int>& reference_ranks,
                                int top_k = 6);

struct SideStats {
  double passes = 0.0;
  double attacking_duels = 0.0;
  double defensive_duels = 0.0;
  double aerial_duels = 0.0;
  double shots = 0.0;
  double goals = 0.0;
};

struct MatchStats {
  SideStats home;
  SideStats away;
};

// Per-game averages of the headline counting stats, split by acting side.
MatchStats match_stats(std::span<const SimulationResult> results,
                       const TypeVocabulary& vocab);

// Same table computed from a batch summary's mean counts (category sums are
// linear, so this equals match_stats over the underlying results).
MatchStats stats_from_summary(const BatchSummary& summary,
                              const TypeVocabulary& vocab);

struct ScenarioDistribution {
  std::string name;
  std::size_t n = 0;
  double mass_loss = 0.0;  // share of matches at 0 points
  double mass_draw = 0.0;  // at 1
  double mass_win = 0.0;   // at 3
  double mean = 0.0;       // per-match expected points
  double variance = 0.0;   // per-match population variance
  double season_mean = 0.0;
  std::vector<int> season_samples;  // bootstrap sums over 19 home fixtures
  double mean_delta = 0.0;          // vs the first (baseline) scenario
  double variance_delta = 0.0;
};

struct PointsDistribution {
  std::vector<ScenarioDistribution> scenarios;  // first entry is the baseline
};

// Empirical per-scenario points distributions plus scenario-vs-baseline
// deltas. `batches` maps scenario name to per-simulation points; the first
// entry is treated as the baseline.
PointsDistribution points_distribution(
    const std::vector<std::pair<std::string, std::vector<int>>>& batches,
    std::uint64_t bootstrap_seed = 0, int n_bootstrap = 2000);

void write_league_csv(const std::filesystem::path& path, const LeagueProjection& p);
void write_league_summary_json(const std::filesystem::path& path,
                               const LeagueProjection& p);
void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, MatchStats>>& rows);

// Long format, one row per simulation: scenario, simulation_index, points.
void write_distribution_long_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<int>>>& batches);
void write_distribution_summary_csv(const std::filesystem::path& path,
                                    const PointsDistribution& dist);

}  // namespace lem
