#include "lem/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "lem/rng.hpp"

namespace lem {

using nlohmann::json;

LeagueProjection project_league(std::vector<TeamExpectation> teams,
                                const std::map<std::string, int>& reference_ranks,
                                int top_k) {
  if (teams.empty()) throw std::invalid_argument("project_league: no teams");

  std::set<std::string> batch_teams;
  for (const auto& t : teams) {
    if (!batch_teams.insert(t.team).second) {
      throw std::invalid_argument("duplicate team in batches: " + t.team);
    }
  }
  if (reference_ranks.size() != teams.size()) {
    throw std::invalid_argument("reference table does not cover the batch teams");
  }
  for (const auto& [team, rank] : reference_ranks) {
    (void)rank;
    if (!batch_teams.count(team)) {
      throw std::invalid_argument("reference team missing from batches: " + team);
    }
  }

  std::sort(teams.begin(), teams.end(), [](const TeamExpectation& a,
                                           const TeamExpectation& b) {
    if (a.expected_points != b.expected_points) {
      return a.expected_points > b.expected_points;
    }
    return a.team < b.team;
  });

  LeagueProjection p;
  p.top_k = top_k;
  double total = 0.0;
  double top_total = 0.0;
  for (std::size_t i = 0; i < teams.size(); ++i) {
    LeagueRow row;
    row.team = teams[i].team;
    row.exp_points_per_match = teams[i].expected_points;
    row.exp_season_points = kHomeFixturesPerSeason * teams[i].expected_points;
    row.exp_rank = static_cast<int>(i) + 1;
    row.ref_rank = reference_ranks.at(row.team);
    row.displacement = std::abs(row.exp_rank - row.ref_rank);
    total += row.displacement;
    if (row.exp_rank <= top_k) top_total += row.displacement;
    p.rows.push_back(std::move(row));
  }
  p.avg_displacement = total / static_cast<double>(teams.size());
  p.topk_avg_displacement =
      top_total / static_cast<double>(std::min<std::size_t>(top_k, teams.size()));
  return p;
}

MatchStats match_stats(std::span<const SimulationResult> results,
                       const TypeVocabulary& vocab) {
  if (results.empty()) throw std::invalid_argument("match_stats: no results");

  MatchStats stats;
  auto side_of = [&stats](int is_home) -> SideStats& {
    return is_home == 1 ? stats.home : stats.away;
  };

  for (const auto& r : results) {
    for (int side = 0; side < 2; ++side) {
      SideStats& s = side_of(side);
      for (int t = 0; t < GameState::kTypeCount; ++t) {
        double c = r.type_counts[side][static_cast<std::size_t>(t)];
        const std::string& cat = vocab.category(t);
        if (cat == "pass") s.passes += c;
        else if (cat == "attacking_duel") s.attacking_duels += c;
        else if (cat == "defensive_duel") s.defensive_duels += c;
        else if (cat == "aerial_duel") s.aerial_duels += c;
        else if (cat == "shot") s.shots += c;
      }
    }
    stats.home.goals += r.home_goals;
    stats.away.goals += r.away_goals;
  }

  double n = static_cast<double>(results.size());
  for (SideStats* s : {&stats.home, &stats.away}) {
    s->passes /= n;
    s->attacking_duels /= n;
    s->defensive_duels /= n;
    s->aerial_duels /= n;
    s->shots /= n;
    s->goals /= n;
  }
  return stats;
}

MatchStats stats_from_summary(const BatchSummary& summary,
                              const TypeVocabulary& vocab) {
  MatchStats stats;
  for (int side = 0; side < 2; ++side) {
    SideStats& s = side == 1 ? stats.home : stats.away;
    for (int t = 0; t < GameState::kTypeCount; ++t) {
      double c = summary.mean_type_counts[side][static_cast<std::size_t>(t)];
      const std::string& cat = vocab.category(t);
      if (cat == "pass") s.passes += c;
      else if (cat == "attacking_duel") s.attacking_duels += c;
      else if (cat == "defensive_duel") s.defensive_duels += c;
      else if (cat == "aerial_duel") s.aerial_duels += c;
      else if (cat == "shot") s.shots += c;
    }
  }
  stats.home.goals = summary.mean_home_goals;
  stats.away.goals = summary.mean_away_goals;
  return stats;
}

PointsDistribution points_distribution(
    const std::vector<std::pair<std::string, std::vector<int>>>& batches,
    std::uint64_t bootstrap_seed, int n_bootstrap) {
  if (batches.empty()) throw std::invalid_argument("points_distribution: no batches");

  PointsDistribution dist;
  std::int64_t baseline_sum = 0;
  std::size_t baseline_n = 0;

  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const auto& [name, points] = batches[bi];
    if (points.empty()) {
      throw std::invalid_argument("points_distribution: empty batch " + name);
    }
    ScenarioDistribution sc;
    sc.name = name;
    sc.n = points.size();

    std::int64_t sum = 0;
    std::size_t wins = 0, draws = 0, losses = 0;
    for (int p : points) {
      if (p == 3) wins++;
      else if (p == 1) draws++;
      else if (p == 0) losses++;
      else throw std::invalid_argument("points must be 0, 1 or 3");
      sum += p;
    }
    double n = static_cast<double>(points.size());
    sc.mass_win = wins / n;
    sc.mass_draw = draws / n;
    sc.mass_loss = losses / n;
    sc.mean = static_cast<double>(sum) / n;
    for (int p : points) {
      double d = p - sc.mean;
      sc.variance += d * d;
    }
    sc.variance /= n;
    sc.season_mean = kHomeFixturesPerSeason * sc.mean;

    Rng rng(bootstrap_seed + bi);
    sc.season_samples.reserve(static_cast<std::size_t>(n_bootstrap));
    for (int b = 0; b < n_bootstrap; ++b) {
      int season = 0;
      for (int g = 0; g < kHomeFixturesPerSeason; ++g) {
        season += points[static_cast<std::size_t>(rng.below(points.size()))];
      }
      sc.season_samples.push_back(season);
    }

    if (bi == 0) {
      baseline_sum = sum;
      baseline_n = points.size();
      sc.mean_delta = 0.0;
      sc.variance_delta = 0.0;
    } else {
      // Equal-size batches subtract exactly through the integer sums.
      if (points.size() == baseline_n) {
        sc.mean_delta = static_cast<double>(sum - baseline_sum) / n;
      } else {
        sc.mean_delta = sc.mean - dist.scenarios.front().mean;
      }
      sc.variance_delta = sc.variance - dist.scenarios.front().variance;
    }
    dist.scenarios.push_back(std::move(sc));
  }
  return dist;
}

// ---------------------------------------------------------------------------
// CSV / JSON writers

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_league_csv(const std::filesystem::path& path, const LeagueProjection& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << "team,exp_points,exp_rank,ref_rank,displacement\n";
  for (const auto& r : p.rows) {
    out << r.team << ',' << fmt_double(r.exp_points_per_match) << ',' << r.exp_rank
        << ',' << r.ref_rank << ',' << r.displacement << '\n';
  }
}

void write_league_summary_json(const std::filesystem::path& path,
                               const LeagueProjection& p) {
  json rows = json::array();
  for (const auto& r : p.rows) {
    rows.push_back({{"team", r.team},
                    {"exp_points_per_match", r.exp_points_per_match},
                    {"exp_season_points", r.exp_season_points},
                    {"exp_rank", r.exp_rank},
                    {"ref_rank", r.ref_rank},
                    {"displacement", r.displacement}});
  }
  json doc = {{"avg_displacement", p.avg_displacement},
              {"top_k", p.top_k},
              {"topk_avg_displacement", p.topk_avg_displacement},
              {"rows", rows}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << doc.dump(2) << '\n';
}

void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, MatchStats>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << "team,passes_home,passes_away,attacking_duels_home,attacking_duels_away,"
         "defensive_duels_home,defensive_duels_away,aerial_duels_home,"
         "aerial_duels_away,shots_home,shots_away,goals_home,goals_away\n";
  for (const auto& [team, st] : rows) {
    out << team << ',' << fmt_double(st.home.passes) << ',' << fmt_double(st.away.passes)
        << ',' << fmt_double(st.home.attacking_duels) << ','
        << fmt_double(st.away.attacking_duels) << ','
        << fmt_double(st.home.defensive_duels) << ','
        << fmt_double(st.away.defensive_duels) << ','
        << fmt_double(st.home.aerial_duels) << ',' << fmt_double(st.away.aerial_duels)
        << ',' << fmt_double(st.home.shots) << ',' << fmt_double(st.away.shots) << ','
        << fmt_double(st.home.goals) << ',' << fmt_double(st.away.goals) << '\n';
  }
}

void write_distribution_long_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<int>>>& batches) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << "scenario,simulation_index,points\n";
  for (const auto& [name, points] : batches) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      out << name << ',' << i << ',' << points[i] << '\n';
    }
  }
}

void write_distribution_summary_csv(const std::filesystem::path& path,
                                    const PointsDistribution& dist) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << "scenario,n,mass_loss,mass_draw,mass_win,mean,variance,season_mean,"
         "mean_delta,variance_delta\n";
  for (const auto& sc : dist.scenarios) {
    out << sc.name << ',' << sc.n << ',' << fmt_double(sc.mass_loss) << ','
        << fmt_double(sc.mass_draw) << ',' << fmt_double(sc.mass_win) << ','
        << fmt_double(sc.mean) << ',' << fmt_double(sc.variance) << ','
        << fmt_double(sc.season_mean) << ',' << fmt_double(sc.mean_delta) << ','
        << fmt_double(sc.variance_delta) << '\n';
  }
}

}  // namespace lem
