#include "lem/event.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lem {

namespace {

bool is_bit(int v) { return v == 0 || v == 1; }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double score_feature(int score) {
  return std::min(score, 10) / 10.0;
}

}  // namespace

int GameState::type_id() const {
  int best = 0;
  for (int i = 1; i < kTypeCount; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

bool valid_event(const Event& e) {
  return e.type_id >= 0 && e.type_id < GameState::kTypeCount &&
         is_bit(e.period) && e.minute >= 0.0 && std::isfinite(e.minute) &&
         e.x >= 0.0 && e.x <= 1.0 && e.y >= 0.0 && e.y <= 1.0 &&
         is_bit(e.is_home) && is_bit(e.is_accurate) && is_bit(e.is_goal) &&
         e.home_score >= 0 && e.away_score >= 0;
}

GameState encode_state(const Event& e) {
  if (e.type_id < 0 || e.type_id >= GameState::kTypeCount) {
    throw std::invalid_argument("event type id out of range: " +
                                std::to_string(e.type_id));
  }
  if (e.x < 0.0 || e.y < 0.0) {
    throw std::invalid_argument("event coordinates must be non-negative");
  }
  if (!valid_event(e)) {
    throw std::invalid_argument("event violates field invariants");
  }

  GameState s;
  s.v[e.type_id] = 1.0;
  s.v[GameState::kPeriod] = e.period;
  s.v[GameState::kMinute] = e.minute / 60.0;
  s.v[GameState::kX] = e.x;
  s.v[GameState::kY] = e.y;
  s.v[GameState::kIsHome] = e.is_home;
  s.v[GameState::kIsAccurate] = e.is_accurate;
  s.v[GameState::kIsGoal] = e.is_goal;
  s.v[GameState::kHomeScore] = score_feature(e.home_score);
  s.v[GameState::kAwayScore] = score_feature(e.away_score);
  return s;
}

Event decode_state(const GameState& s) {
  Event e;
  e.type_id = s.type_id();
  e.period = static_cast<int>(std::llround(s.period()));
  e.minute = s.minute_norm() * 60.0;
  e.x = s.x();
  e.y = s.y();
  e.is_home = static_cast<int>(std::llround(s.is_home()));
  e.is_accurate = static_cast<int>(std::llround(s.is_accurate()));
  e.is_goal = static_cast<int>(std::llround(s.is_goal()));
  e.home_score = static_cast<int>(std::llround(s.home_score_norm() * 10.0));
  e.away_score = static_cast<int>(std::llround(s.away_score_norm() * 10.0));
  return e;
}

void validate_prediction(const PredictedEvent& p) {
  if (p.type_id < 0 || p.type_id >= GameState::kTypeCount)
    throw std::invalid_argument("prediction type id out of range");
  if (p.x_bin < 0 || p.x_bin > 100 || p.y_bin < 0 || p.y_bin > 100)
    throw std::invalid_argument("prediction location bin out of range");
  if (p.time_elapsed_bin < 0 || p.time_elapsed_bin > 59)
    throw std::invalid_argument("prediction time bin out of range");
  if (!is_bit(p.is_accurate) || !is_bit(p.is_goal) || !is_bit(p.is_home))
    throw std::invalid_argument("prediction flags must be 0/1");
}

GameState apply_prediction(const GameState& state, const PredictedEvent& pred) {
  validate_prediction(pred);

  GameState s;
  s.v[pred.type_id] = 1.0;
  s.v[GameState::kPeriod] = state.period();
  s.v[GameState::kMinute] = state.minute_norm() + pred.time_elapsed_bin / 60.0;
  s.v[GameState::kX] = pred.x_bin / 100.0;
  s.v[GameState::kY] = pred.y_bin / 100.0;
  s.v[GameState::kIsHome] = pred.is_home;
  s.v[GameState::kIsAccurate] = pred.is_accurate;
  s.v[GameState::kIsGoal] = pred.is_goal;

  double home = state.home_score_norm();
  double away = state.away_score_norm();
  if (pred.is_goal == 1) {
    // Scores live on the k/10 grid; reconstruct the integer tally, add the
    // goal and re-normalize so repeated increments stay exact.
    if (pred.is_home == 1) {
      home = score_feature(static_cast<int>(std::llround(home * 10.0)) + 1);
    } else {
      away = score_feature(static_cast<int>(std::llround(away * 10.0)) + 1);
    }
  }
  s.v[GameState::kHomeScore] = clamp01(home);
  s.v[GameState::kAwayScore] = clamp01(away);
  return s;
}

}  // namespace lem
