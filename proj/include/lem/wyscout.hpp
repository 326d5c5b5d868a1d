#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "lem/corpus.hpp"
#include "lem/vocab.hpp"

namespace lem {

struct IngestOptions {
  std::string league;
  std::string season;
  bool error_on_unknown_type = false;  // default: drop with a logged reason
};

struct IngestReport {
  std::size_t raw_records = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count
  std::size_t matches_without_side_info = 0;   // home side fell back to heuristic
};

// Optional sidecar mapping match id -> home team id, read from a Wyscout
// matches file ({"wyId":..., "teamsData": {"<id>": {"side": "home"}}}).
using MatchSides = std::map<std::int64_t, std::int64_t>;
MatchSides parse_match_sides(std::istream& in);

// Parses one league file (a JSON array of event records, or an object with
// an "events" array). Each record either becomes one Event or is dropped
// with a reason in the report. Percent coordinates are divided by 100, the
// running score is reconstructed by scanning goal tags in order, and events
// with missing coordinates inherit the previous event's location.
//
// Malformed JSON throws with the byte offset in the message. An unknown
// event type either drops the record or throws, per options.
Corpus parse_events(std::istream& raw, const TypeVocabulary& vocab,
                    const IngestOptions& options, IngestReport* report = nullptr,
                    const MatchSides* sides = nullptr);

}  // namespace lem
