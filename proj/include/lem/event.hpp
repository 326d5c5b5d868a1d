#pragma once

#include <array>
#include <cstdint>

namespace lem {

// One on-ball action. Coordinates are normalized to [0,1] in the acting
// team's attacking perspective (origin bottom left). home_score/away_score
// are the running match score once this event has resolved, so a goal event
// already carries the incremented score.
struct Event {
  int type_id = 0;          // 0..32, fixed by the type vocabulary
  int period = 0;           // 0 first half, 1 second half
  double minute = 0.0;      // minutes since the start of the period
  double x = 0.0;
  double y = 0.0;
  int is_home = 0;
  int is_accurate = 0;
  int is_goal = 0;
  int home_score = 0;
  int away_score = 0;
  std::int64_t team_id = -1;
  std::int64_t player_id = -1;
  std::int64_t match_id = -1;
};

// The 42-dimensional feature vector conditioning every prediction:
// a 33-way one-hot of the previous event type followed by
// [period, minute/60, x, y, is_home, is_accurate, is_goal,
//  home_score/10, away_score/10]. Scores clamp at 10 before normalization.
struct GameState {
  static constexpr int kTypeCount = 33;
  static constexpr int kDim = 42;

  static constexpr int kPeriod = 33;
  static constexpr int kMinute = 34;
  static constexpr int kX = 35;
  static constexpr int kY = 36;
  static constexpr int kIsHome = 37;
  static constexpr int kIsAccurate = 38;
  static constexpr int kIsGoal = 39;
  static constexpr int kHomeScore = 40;
  static constexpr int kAwayScore = 41;

  std::array<double, kDim> v{};

  int type_id() const;  // argmax over the one-hot block
  double period() const { return v[kPeriod]; }
  double minute_norm() const { return v[kMinute]; }
  double x() const { return v[kX]; }
  double y() const { return v[kY]; }
  double is_home() const { return v[kIsHome]; }
  double is_accurate() const { return v[kIsAccurate]; }
  double is_goal() const { return v[kIsGoal]; }
  double home_score_norm() const { return v[kHomeScore]; }
  double away_score_norm() const { return v[kAwayScore]; }
};

// A sampled next event, still in the discretized output space of the model:
// percent bins for the location, whole minutes for the elapsed time.
struct PredictedEvent {
  int type_id = 0;
  int is_accurate = 0;
  int is_goal = 0;
  int x_bin = 0;             // 0..100
  int y_bin = 0;             // 0..100
  int time_elapsed_bin = 0;  // 0..59, minutes until this event
  int is_home = 0;
};

// Builds the feature vector for an event. Throws std::invalid_argument if the
// event violates its invariants (type id range, coordinate range, flags).
GameState encode_state(const Event& event);

// Recovers the modeled fields from a feature vector. Scores and the type id
// are recovered exactly; minute comes back through the /60 scaling. The
// identity fields (team/player/match) are not part of the state and are -1.
Event decode_state(const GameState& state);

// The interpretation step of the simulation loop: produces the state that
// conditions the event after `pred`. Copies the sampled fields, advances the
// clock by the elapsed-time bin and, when pred.is_goal is set, credits one
// goal to the side given by pred.is_home. Period handling (halftime reset)
// belongs to the simulator, not here.
GameState apply_prediction(const GameState& state, const PredictedEvent& pred);

bool valid_event(const Event& event);
void validate_prediction(const PredictedEvent& pred);  // throws on bad bins

}  // namespace lem
