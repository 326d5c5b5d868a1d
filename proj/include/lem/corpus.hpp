#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lem/event.hpp"
#include "lem/vocab.hpp"

namespace lem {

struct MatchInfo {
  std::int64_t match_id = -1;
  std::string league;
  std::string season;
  std::int64_t home_team_id = -1;
  std::int64_t away_team_id = -1;
  std::size_t begin = 0;  // [begin, end) into Corpus::events
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

// An immutable, match-grouped event collection. Within each match events are
// sorted by (period, minute, original sequence index).
struct Corpus {
  std::vector<Event> events;
  std::vector<MatchInfo> matches;
  std::string mapping_version;

  std::size_t n_events() const { return events.size(); }
  std::size_t n_matches() const { return matches.size(); }
  const MatchInfo* find_match(std::int64_t match_id) const;
  void validate() const;  // grouping, ordering, two-teams-per-match
};

// Columnar binary corpus file: "LEME" magic, u32 version, u64 header length,
// JSON header (column order, type-mapping version, match table), then one
// little-endian array per column in header order.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);
Corpus read_corpus(const std::filesystem::path& path);
Corpus read_corpus(std::istream& in);

// Human-readable export, one row per event.
void write_corpus_csv(const Corpus& corpus, const TypeVocabulary& vocab,
                      const std::filesystem::path& path);

// Merges corpora that share a mapping version; match ids must not collide.
Corpus merge_corpora(const std::vector<Corpus>& parts);

struct SplitSpec {
  std::vector<std::string> train_leagues;
  std::vector<std::string> val_leagues;
  std::vector<std::string> pool_leagues;
};

struct SplitResult {
  Corpus train;
  Corpus validation;
  Corpus finetune_pool;
};

// Partitions by match league. The three selections are disjoint by
// construction of the league lists; a non-empty selector that matches no
// match is an error, an empty selector yields an empty corpus.
SplitResult split_corpus(const Corpus& corpus, const SplitSpec& spec);

}  // namespace lem
