#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lem/cascade.hpp"
#include "lem/event.hpp"

namespace lem {

struct BatchConfig {
  int n_simulations = 2500;
  std::uint64_t base_seed = 0;
  int max_events_per_match = 4000;  // runaway guard, not an error when hit
  double half_length_minutes = 47.0;  // effective half including stoppage
  double temperature = 1.0;
  int threads = 0;  // 0 = hardware concurrency
  bool record_events = false;

  void validate() const;
};

struct SimEvent {
  PredictedEvent pred;
  int period = 0;
  double abs_minute = 0.0;  // period * half_length + minute within period
};

struct SimulationResult {
  std::uint64_t seed = 0;
  int home_goals = 0;
  int away_goals = 0;
  int points_home = 0;  // 3 win / 1 draw / 0 loss
  bool truncated = false;
  int n_events = 0;
  // [side][type]: side 1 = home, 0 = away, matching the is_home flag.
  std::array<std::array<std::uint32_t, GameState::kTypeCount>, 2> type_counts{};
  std::vector<SimEvent> events;  // filled only when record_events is set
};

int points_for(int home_goals, int away_goals);

// Rolls one match from kickoff: sample -> apply, resetting the clock and
// flipping the kickoff side at halftime, stopping when the second half
// reaches the half length (or the event guard trips, which sets `truncated`).
SimulationResult simulate_match(const ModelCascade& cascade, const BatchConfig& cfg,
                                std::uint64_t seed);

struct BatchSummary {
  std::size_t n_simulations = 0;
  std::uint64_t base_seed = 0;
  double expected_points = 0.0;  // mean of points_home
  double std_error = 0.0;        // sample sd / sqrt(n)
  int wins = 0, draws = 0, losses = 0;
  double mean_home_goals = 0.0, mean_away_goals = 0.0;
  double mean_events = 0.0;
  double truncated_rate = 0.0;
  std::array<std::array<double, GameState::kTypeCount>, 2> mean_type_counts{};
  std::vector<int> points;  // per simulation, in simulation-index order
};

struct BatchResult {
  std::vector<SimulationResult> results;
  BatchSummary summary;
};

// n_simulations independent matches with per-simulation rng streams seeded
// base_seed + index. The result multiset does not depend on the thread
// count; results are merged by index.
BatchResult simulate_batch(const ModelCascade& cascade, const BatchConfig& cfg);

// With home_perspective false the points/wins tally flips to the away side
// (the mirror-image analysis); goal and count fields keep their sides.
BatchSummary summarize(std::span<const SimulationResult> results,
                       std::uint64_t base_seed, bool home_perspective = true);

// One CSV row per simulation: seed, goals, points, guard flag, event count
// and the per-side per-type counts.
void write_results_csv(const std::filesystem::path& path,
                       std::span<const SimulationResult> results,
                       const TypeVocabulary& vocab);
void write_summary_json(const std::filesystem::path& path, const BatchSummary& s);
BatchSummary read_summary_json(const std::filesystem::path& path);

}  // namespace lem
