#include "lem/wyscout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace lem {

using nlohmann::json;

MatchSides parse_match_sides(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("matches file: parse error at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  MatchSides sides;
  for (const auto& m : doc) {
    std::int64_t match_id = m.at("wyId").get<std::int64_t>();
    const auto& teams = m.at("teamsData");
    for (auto it = teams.begin(); it != teams.end(); ++it) {
      if (it.value().at("side").get<std::string>() == "home") {
        sides[match_id] = std::stoll(it.key());
      }
    }
  }
  return sides;
}

namespace {

struct RawEvent {
  std::size_t seq = 0;  // original position in the file
  int type_id = -1;
  int period = 0;
  double sec = 0.0;
  double x = 0.0, y = 0.0;
  bool has_position = false;
  bool accurate = false;
  bool goal_tag = false;      // tag 101
  bool own_goal_tag = false;  // tag 102
  std::int64_t team_id = -1;
  std::int64_t player_id = 0;
  std::int64_t match_id = -1;
};

void count_drop(IngestReport* report, const std::string& reason) {
  if (report != nullptr) report->dropped[reason]++;
}

}  // namespace

Corpus parse_events(std::istream& raw, const TypeVocabulary& vocab,
                    const IngestOptions& options, IngestReport* report,
                    const MatchSides* sides) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("event file: parse error at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  const json* records = &doc;
  if (doc.is_object() && doc.contains("events")) records = &doc.at("events");
  if (!records->is_array()) {
    throw std::runtime_error("event file: expected a JSON array of records");
  }

  std::vector<RawEvent> parsed;
  parsed.reserve(records->size());
  std::vector<std::int64_t> match_order;
  std::map<std::int64_t, std::vector<std::size_t>> by_match;

  std::size_t seq = 0;
  for (const auto& rec : *records) {
    if (report != nullptr) report->raw_records++;
    std::size_t my_seq = seq++;

    if (!rec.contains("matchId") || !rec.contains("teamId")) {
      count_drop(report, "missing_ids");
      continue;
    }

    RawEvent e;
    e.seq = my_seq;
    e.match_id = rec.at("matchId").get<std::int64_t>();
    e.team_id = rec.at("teamId").get<std::int64_t>();
    e.player_id = rec.value("playerId", static_cast<std::int64_t>(0));

    std::string period = rec.value("matchPeriod", std::string());
    if (period == "1H") {
      e.period = 0;
    } else if (period == "2H") {
      e.period = 1;
    } else {
      count_drop(report, period.empty() ? "missing_period" : "unsupported_period");
      continue;
    }

    if (!rec.contains("eventSec")) {
      count_drop(report, "missing_timestamp");
      continue;
    }
    e.sec = rec.at("eventSec").get<double>();
    if (!(e.sec >= 0.0) || !std::isfinite(e.sec)) {
      count_drop(report, "bad_timestamp");
      continue;
    }

    std::string label = rec.value("subEventName", std::string());
    if (label.empty()) label = rec.value("eventName", std::string());
    e.type_id = vocab.resolve_raw(label);
    if (e.type_id < 0) {
      if (options.error_on_unknown_type) {
        throw std::runtime_error("unknown event type label: '" + label + "'");
      }
      count_drop(report, "unknown_type");
      continue;
    }

    if (rec.contains("positions") && rec.at("positions").is_array() &&
        !rec.at("positions").empty()) {
      const auto& pos = rec.at("positions").front();
      double px = pos.value("x", -1.0);
      double py = pos.value("y", -1.0);
      if (px >= 0.0 && py >= 0.0) {
        e.x = std::min(px, 100.0) / 100.0;
        e.y = std::min(py, 100.0) / 100.0;
        e.has_position = true;
      }
    }

    if (rec.contains("tags")) {
      for (const auto& tag : rec.at("tags")) {
        int id = tag.is_object() ? tag.value("id", 0) : tag.get<int>();
        if (id == 1801) e.accurate = true;
        if (id == 101) e.goal_tag = true;
        if (id == 102) e.own_goal_tag = true;
      }
    }

    by_match[e.match_id].push_back(parsed.size());
    if (by_match[e.match_id].size() == 1) match_order.push_back(e.match_id);
    parsed.push_back(e);
  }

  Corpus corpus;
  corpus.mapping_version = vocab.version();

  for (std::int64_t match_id : match_order) {
    auto& idx = by_match[match_id];
    std::stable_sort(idx.begin(), idx.end(), [&parsed](std::size_t a, std::size_t b) {
      const RawEvent& ea = parsed[a];
      const RawEvent& eb = parsed[b];
      if (ea.period != eb.period) return ea.period < eb.period;
      if (ea.sec != eb.sec) return ea.sec < eb.sec;
      return ea.seq < eb.seq;
    });

    std::set<std::int64_t> teams;
    for (std::size_t i : idx) teams.insert(parsed[i].team_id);
    if (teams.size() > 2) {
      count_drop(report, "match_with_more_than_two_teams");
      continue;
    }

    std::int64_t home_team = -1;
    if (sides != nullptr) {
      auto it = sides->find(match_id);
      if (it != sides->end()) home_team = it->second;
    }
    if (home_team == -1) {
      // No side info: take the first acting team as the home side.
      home_team = parsed[idx.front()].team_id;
      if (report != nullptr) report->matches_without_side_info++;
    }
    std::int64_t away_team = -1;
    for (std::int64_t t : teams) {
      if (t != home_team) away_team = t;
    }

    MatchInfo m;
    m.match_id = match_id;
    m.league = options.league;
    m.season = options.season;
    m.home_team_id = home_team;
    m.away_team_id = away_team;
    m.begin = corpus.events.size();

    int home_score = 0;
    int away_score = 0;
    double last_x = 0.5, last_y = 0.5;
    for (std::size_t i : idx) {
      const RawEvent& r = parsed[i];
      Event e;
      e.type_id = r.type_id;
      e.period = r.period;
      e.minute = r.sec / 60.0;
      if (r.has_position) {
        e.x = r.x;
        e.y = r.y;
        last_x = r.x;
        last_y = r.y;
      } else {
        e.x = last_x;
        e.y = last_y;
      }
      e.is_home = r.team_id == home_team ? 1 : 0;
      e.is_accurate = r.accurate ? 1 : 0;

      bool scoring_goal = r.goal_tag && vocab.goal_capable(r.type_id);
      if (r.own_goal_tag) {
        // Own goal: credited to the opposing side, the event itself is not a
        // successful shot.
        if (e.is_home == 1) ++away_score; else ++home_score;
      } else if (scoring_goal) {
        if (e.is_home == 1) ++home_score; else ++away_score;
        e.is_goal = 1;
      }
      e.home_score = home_score;
      e.away_score = away_score;
      e.team_id = r.team_id;
      e.player_id = r.player_id;
      e.match_id = match_id;
      corpus.events.push_back(e);
      if (report != nullptr) report->kept++;
    }
    m.end = corpus.events.size();
    corpus.matches.push_back(std::move(m));
  }

  return corpus;
}

}  // namespace lem
