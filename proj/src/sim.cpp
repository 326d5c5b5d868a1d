#include "lem/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lem {

using nlohmann::json;

void BatchConfig::validate() const {
  if (n_simulations < 1) throw std::invalid_argument("n_simulations must be >= 1");
  if (max_events_per_match < 1) throw std::invalid_argument("max_events guard must be >= 1");
  if (!(half_length_minutes > 0.0)) throw std::invalid_argument("half length must be positive");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

int points_for(int home_goals, int away_goals) {
  if (home_goals > away_goals) return 3;
  if (home_goals == away_goals) return 1;
  return 0;
}

namespace {

GameState kickoff_state(const ModelCascade& cascade, int period, int home_goals,
                        int away_goals) {
  Event kick;
  kick.type_id = cascade.vocab.kickoff_type();
  kick.period = period;
  kick.minute = 0.0;
  kick.x = 0.5;
  kick.y = 0.5;
  kick.is_home = period == 0 ? 1 : 0;  // sides alternate the kickoff
  kick.is_accurate = 1;
  kick.is_goal = 0;
  kick.home_score = home_goals;
  kick.away_score = away_goals;
  return encode_state(kick);
}

SimulationResult run_one(const ModelCascade& cascade, CascadeEvaluator& eval,
                         const BatchConfig& cfg, std::uint64_t seed) {
  SimulationResult res;
  res.seed = seed;
  Rng rng(seed);

  GameState state = kickoff_state(cascade, 0, 0, 0);
  int period = 0;
  int minute = 0;  // whole minutes within the period (sum of elapsed bins)

  for (;;) {
    PredictedEvent pred = eval.sample(state, rng, cfg.temperature);
    state = apply_prediction(state, pred);
    minute += pred.time_elapsed_bin;
    res.n_events += 1;
    res.type_counts[pred.is_home][static_cast<std::size_t>(pred.type_id)] += 1;
    if (pred.is_goal == 1) {
      if (pred.is_home == 1) res.home_goals += 1; else res.away_goals += 1;
    }
    if (cfg.record_events) {
      res.events.push_back(
          {pred, period, period * cfg.half_length_minutes + minute});
    }

    if (minute >= cfg.half_length_minutes) {
      if (period == 0) {
        period = 1;
        minute = 0;
        state = kickoff_state(cascade, 1, res.home_goals, res.away_goals);
      } else {
        break;  // full time
      }
    }
    if (res.n_events >= cfg.max_events_per_match) {
      res.truncated = true;
      break;
    }
  }

  res.points_home = points_for(res.home_goals, res.away_goals);
  return res;
}

}  // namespace

SimulationResult simulate_match(const ModelCascade& cascade, const BatchConfig& cfg,
                                std::uint64_t seed) {
  cfg.validate();
  CascadeEvaluator eval(cascade);
  return run_one(cascade, eval, cfg, seed);
}

BatchResult simulate_batch(const ModelCascade& cascade, const BatchConfig& cfg) {
  cfg.validate();

  BatchResult out;
  out.results.resize(static_cast<std::size_t>(cfg.n_simulations));

  unsigned n_threads = cfg.threads > 0
                           ? static_cast<unsigned>(cfg.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads,
                                 static_cast<unsigned>(cfg.n_simulations));

  auto worker = [&](std::size_t first, std::size_t last,
                    std::exception_ptr& error) {
    try {
      CascadeEvaluator eval(cascade);
      for (std::size_t i = first; i < last; ++i) {
        out.results[i] =
            run_one(cascade, eval, cfg, cfg.base_seed + static_cast<std::uint64_t>(i));
      }
    } catch (...) {
      error = std::current_exception();
    }
  };

  if (n_threads <= 1) {
    std::exception_ptr error;
    worker(0, out.results.size(), error);
    if (error) std::rethrow_exception(error);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_threads);
    std::size_t per = out.results.size() / n_threads;
    std::size_t extra = out.results.size() % n_threads;
    std::size_t cursor = 0;
    for (unsigned t = 0; t < n_threads; ++t) {
      std::size_t count = per + (t < extra ? 1 : 0);
      threads.emplace_back(worker, cursor, cursor + count, std::ref(errors[t]));
      cursor += count;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  out.summary = summarize(out.results, cfg.base_seed);
  return out;
}

BatchSummary summarize(std::span<const SimulationResult> results,
                       std::uint64_t base_seed, bool home_perspective) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");

  BatchSummary s;
  s.n_simulations = results.size();
  s.base_seed = base_seed;
  s.points.reserve(results.size());

  std::int64_t point_sum = 0;
  std::int64_t truncated = 0;
  for (const auto& r : results) {
    int pts = home_perspective ? r.points_home
                               : points_for(r.away_goals, r.home_goals);
    s.points.push_back(pts);
    point_sum += pts;
    if (pts == 3) s.wins++;
    else if (pts == 1) s.draws++;
    else s.losses++;
    s.mean_home_goals += r.home_goals;
    s.mean_away_goals += r.away_goals;
    s.mean_events += r.n_events;
    truncated += r.truncated ? 1 : 0;
    for (int side = 0; side < 2; ++side) {
      for (int t = 0; t < GameState::kTypeCount; ++t) {
        s.mean_type_counts[side][static_cast<std::size_t>(t)] +=
            r.type_counts[side][static_cast<std::size_t>(t)];
      }
    }
  }

  double n = static_cast<double>(results.size());
  s.expected_points = static_cast<double>(point_sum) / n;
  s.mean_home_goals /= n;
  s.mean_away_goals /= n;
  s.mean_events /= n;
  s.truncated_rate = static_cast<double>(truncated) / n;
  for (auto& side : s.mean_type_counts) {
    for (auto& v : side) v /= n;
  }

  if (results.size() > 1) {
    double var = 0.0;
    for (int pts : s.points) {
      double d = pts - s.expected_points;
      var += d * d;
    }
    var /= (n - 1.0);
    s.std_error = std::sqrt(var / n);
  }
  return s;
}

void write_results_csv(const std::filesystem::path& path,
                       std::span<const SimulationResult> results,
                       const TypeVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());

  out << "sim_index,seed,home_goals,away_goals,points_home,truncated,n_events";
  for (int t = 0; t < GameState::kTypeCount; ++t) out << ",home_" << vocab.name(t);
  for (int t = 0; t < GameState::kTypeCount; ++t) out << ",away_" << vocab.name(t);
  out << '\n';

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << i << ',' << r.seed << ',' << r.home_goals << ',' << r.away_goals
        << ',' << r.points_home << ',' << (r.truncated ? 1 : 0) << ','
        << r.n_events;
    for (int t = 0; t < GameState::kTypeCount; ++t)
      out << ',' << r.type_counts[1][static_cast<std::size_t>(t)];
    for (int t = 0; t < GameState::kTypeCount; ++t)
      out << ',' << r.type_counts[0][static_cast<std::size_t>(t)];
    out << '\n';
  }
  if (!out) throw std::runtime_error("results CSV write failed");
}

namespace {

json summary_to_json(const BatchSummary& s) {
  json mean_counts = json::object();
  json home = json::object(), away = json::object();
  for (int t = 0; t < GameState::kTypeCount; ++t) {
    home[std::to_string(t)] = s.mean_type_counts[1][static_cast<std::size_t>(t)];
    away[std::to_string(t)] = s.mean_type_counts[0][static_cast<std::size_t>(t)];
  }
  mean_counts["home"] = home;
  mean_counts["away"] = away;
  return json{{"n_simulations", s.n_simulations},
              {"base_seed", s.base_seed},
              {"expected_points", s.expected_points},
              {"std_error", s.std_error},
              {"wins", s.wins},
              {"draws", s.draws},
              {"losses", s.losses},
              {"mean_home_goals", s.mean_home_goals},
              {"mean_away_goals", s.mean_away_goals},
              {"mean_events", s.mean_events},
              {"truncated_rate", s.truncated_rate},
              {"mean_type_counts", mean_counts},
              {"points", s.points}};
}

}  // namespace

void write_summary_json(const std::filesystem::path& path, const BatchSummary& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << summary_to_json(s).dump(2) << '\n';
}

BatchSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open summary: " + path.string());
  json j = json::parse(in);

  BatchSummary s;
  s.n_simulations = j.at("n_simulations").get<std::size_t>();
  s.base_seed = j.at("base_seed").get<std::uint64_t>();
  s.expected_points = j.at("expected_points").get<double>();
  s.std_error = j.at("std_error").get<double>();
  s.wins = j.at("wins").get<int>();
  s.draws = j.at("draws").get<int>();
  s.losses = j.at("losses").get<int>();
  s.mean_home_goals = j.at("mean_home_goals").get<double>();
  s.mean_away_goals = j.at("mean_away_goals").get<double>();
  s.mean_events = j.value("mean_events", 0.0);
  s.truncated_rate = j.at("truncated_rate").get<double>();
  s.points = j.at("points").get<std::vector<int>>();
  if (j.contains("mean_type_counts")) {
    const auto& mc = j.at("mean_type_counts");
    for (int t = 0; t < GameState::kTypeCount; ++t) {
      s.mean_type_counts[1][static_cast<std::size_t>(t)] =
          mc.at("home").value(std::to_string(t), 0.0);
      s.mean_type_counts[0][static_cast<std::size_t>(t)] =
          mc.at("away").value(std::to_string(t), 0.0);
    }
  }
  return s;
}

}  // namespace lem
