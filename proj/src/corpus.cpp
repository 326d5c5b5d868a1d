#include "lem/corpus.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lem {

using nlohmann::json;

const MatchInfo* Corpus::find_match(std::int64_t match_id) const {
  for (const auto& m : matches) {
    if (m.match_id == match_id) return &m;
  }
  return nullptr;
}

void Corpus::validate() const {
  std::size_t cursor = 0;
  std::set<std::int64_t> seen;
  for (const auto& m : matches) {
    if (m.begin != cursor || m.end < m.begin || m.end > events.size()) {
      throw std::runtime_error("corpus match ranges are not contiguous");
    }
    if (!seen.insert(m.match_id).second) {
      throw std::runtime_error("duplicate match id " + std::to_string(m.match_id));
    }
    cursor = m.end;
    for (std::size_t i = m.begin; i < m.end; ++i) {
      const Event& e = events[i];
      if (e.match_id != m.match_id) {
        throw std::runtime_error("event match id does not match its group");
      }
      if (e.team_id != m.home_team_id && e.team_id != m.away_team_id) {
        throw std::runtime_error("event team id outside the match's two teams");
      }
      if (i > m.begin) {
        const Event& p = events[i - 1];
        if (e.period < p.period ||
            (e.period == p.period && e.minute < p.minute)) {
          throw std::runtime_error("match events are not time-sorted");
        }
      }
    }
  }
  if (cursor != events.size()) {
    throw std::runtime_error("corpus has events outside any match range");
  }
}

// ---------------------------------------------------------------------------
// Binary IO

namespace {

constexpr char kMagic[4] = {'L', 'E', 'M', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

const std::vector<std::string> kColumns = {
    "type_id:u8",   "period:u8",     "is_home:u8",   "is_accurate:u8",
    "is_goal:u8",   "home_score:u16", "away_score:u16", "minute:f64",
    "x:f64",        "y:f64",         "team_id:i64",  "player_id:i64"};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(T)) {
    throw std::runtime_error("corpus file truncated");
  }
  return v;
}

template <typename T, typename Get>
void write_column(std::ostream& out, const std::vector<Event>& ev, Get get) {
  for (const auto& e : ev) {
    T v = static_cast<T>(get(e));
    write_pod(out, v);
  }
}

template <typename T, typename Set>
void read_column(std::istream& in, std::vector<Event>& ev, Set set) {
  for (auto& e : ev) set(e, read_pod<T>(in));
}

}  // namespace

void write_corpus(const Corpus& corpus, std::ostream& out) {
  json matches = json::array();
  for (const auto& m : corpus.matches) {
    matches.push_back({{"match_id", m.match_id},
                       {"league", m.league},
                       {"season", m.season},
                       {"home_team_id", m.home_team_id},
                       {"away_team_id", m.away_team_id},
                       {"n_events", m.end - m.begin}});
  }
  json header = {{"version", kFormatVersion},
                 {"type_mapping_version", corpus.mapping_version},
                 {"n_events", corpus.events.size()},
                 {"columns", kColumns},
                 {"matches", matches}};
  std::string header_str = header.dump();

  out.write(kMagic, 4);
  write_pod(out, kFormatVersion);
  std::uint64_t hlen = header_str.size();
  write_pod(out, hlen);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  const auto& ev = corpus.events;
  write_column<std::uint8_t>(out, ev, [](const Event& e) { return e.type_id; });
  write_column<std::uint8_t>(out, ev, [](const Event& e) { return e.period; });
  write_column<std::uint8_t>(out, ev, [](const Event& e) { return e.is_home; });
  write_column<std::uint8_t>(out, ev, [](const Event& e) { return e.is_accurate; });
  write_column<std::uint8_t>(out, ev, [](const Event& e) { return e.is_goal; });
  write_column<std::uint16_t>(out, ev, [](const Event& e) { return e.home_score; });
  write_column<std::uint16_t>(out, ev, [](const Event& e) { return e.away_score; });
  write_column<double>(out, ev, [](const Event& e) { return e.minute; });
  write_column<double>(out, ev, [](const Event& e) { return e.x; });
  write_column<double>(out, ev, [](const Event& e) { return e.y; });
  write_column<std::int64_t>(out, ev, [](const Event& e) { return e.team_id; });
  write_column<std::int64_t>(out, ev, [](const Event& e) { return e.player_id; });
  if (!out) throw std::runtime_error("corpus write failed");
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  write_corpus(corpus, out);
}

Corpus read_corpus(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("bad corpus magic");
  }
  auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported corpus version " + std::to_string(version));
  }
  auto hlen = read_pod<std::uint64_t>(in);
  if (hlen > (1u << 30)) throw std::runtime_error("corpus header too large");
  std::string header_str(hlen, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(hlen));
  if (static_cast<std::uint64_t>(in.gcount()) != hlen) {
    throw std::runtime_error("corpus file truncated in header");
  }
  json header = json::parse(header_str);
  if (header.at("columns").get<std::vector<std::string>>() != kColumns) {
    throw std::runtime_error("corpus column layout mismatch");
  }

  Corpus c;
  c.mapping_version = header.at("type_mapping_version").get<std::string>();
  std::size_t n_events = header.at("n_events").get<std::size_t>();
  if (n_events > (1ull << 31)) {
    throw std::runtime_error("corpus header declares an implausible event count");
  }
  c.events.resize(n_events);

  std::size_t cursor = 0;
  for (const auto& mj : header.at("matches")) {
    MatchInfo m;
    m.match_id = mj.at("match_id").get<std::int64_t>();
    m.league = mj.at("league").get<std::string>();
    m.season = mj.at("season").get<std::string>();
    m.home_team_id = mj.at("home_team_id").get<std::int64_t>();
    m.away_team_id = mj.at("away_team_id").get<std::int64_t>();
    m.begin = cursor;
    cursor += mj.at("n_events").get<std::size_t>();
    m.end = cursor;
    c.matches.push_back(std::move(m));
  }
  if (cursor != n_events) {
    throw std::runtime_error("corpus match table does not cover event count");
  }

  auto& ev = c.events;
  read_column<std::uint8_t>(in, ev, [](Event& e, std::uint8_t v) { e.type_id = v; });
  read_column<std::uint8_t>(in, ev, [](Event& e, std::uint8_t v) { e.period = v; });
  read_column<std::uint8_t>(in, ev, [](Event& e, std::uint8_t v) { e.is_home = v; });
  read_column<std::uint8_t>(in, ev, [](Event& e, std::uint8_t v) { e.is_accurate = v; });
  read_column<std::uint8_t>(in, ev, [](Event& e, std::uint8_t v) { e.is_goal = v; });
  read_column<std::uint16_t>(in, ev, [](Event& e, std::uint16_t v) { e.home_score = v; });
  read_column<std::uint16_t>(in, ev, [](Event& e, std::uint16_t v) { e.away_score = v; });
  read_column<double>(in, ev, [](Event& e, double v) { e.minute = v; });
  read_column<double>(in, ev, [](Event& e, double v) { e.x = v; });
  read_column<double>(in, ev, [](Event& e, double v) { e.y = v; });
  read_column<std::int64_t>(in, ev, [](Event& e, std::int64_t v) { e.team_id = v; });
  read_column<std::int64_t>(in, ev, [](Event& e, std::int64_t v) { e.player_id = v; });

  for (const auto& m : c.matches) {
    for (std::size_t i = m.begin; i < m.end; ++i) c.events[i].match_id = m.match_id;
  }
  return c;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + path.string());
  return read_corpus(in);
}

void write_corpus_csv(const Corpus& corpus, const TypeVocabulary& vocab,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << "match_id,league,team_id,player_id,type_id,type_name,period,minute,x,y,"
         "is_home,is_accurate,is_goal,home_score,away_score\n";
  char buf[96];
  for (const auto& m : corpus.matches) {
    for (std::size_t i = m.begin; i < m.end; ++i) {
      const Event& e = corpus.events[i];
      out << e.match_id << ',' << m.league << ',' << e.team_id << ','
          << e.player_id << ',' << e.type_id << ',' << vocab.name(e.type_id)
          << ',' << e.period << ',';
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", e.minute, e.x, e.y);
      out << buf << ',' << e.is_home << ',' << e.is_accurate << ',' << e.is_goal
          << ',' << e.home_score << ',' << e.away_score << '\n';
    }
  }
}

Corpus merge_corpora(const std::vector<Corpus>& parts) {
  Corpus merged;
  std::set<std::int64_t> seen;
  for (const auto& part : parts) {
    if (merged.mapping_version.empty()) {
      merged.mapping_version = part.mapping_version;
    } else if (!part.mapping_version.empty() &&
               part.mapping_version != merged.mapping_version) {
      throw std::runtime_error("cannot merge corpora with different mapping versions");
    }
    for (const auto& m : part.matches) {
      if (!seen.insert(m.match_id).second) {
        throw std::runtime_error("match id collision while merging: " +
                                 std::to_string(m.match_id));
      }
      MatchInfo nm = m;
      nm.begin = merged.events.size();
      merged.events.insert(merged.events.end(), part.events.begin() + m.begin,
                           part.events.begin() + m.end);
      nm.end = merged.events.size();
      merged.matches.push_back(std::move(nm));
    }
  }
  return merged;
}

SplitResult split_corpus(const Corpus& corpus, const SplitSpec& spec) {
  auto take = [&corpus](const std::vector<std::string>& leagues) {
    Corpus out;
    out.mapping_version = corpus.mapping_version;
    std::set<std::string> wanted(leagues.begin(), leagues.end());
    for (const auto& m : corpus.matches) {
      if (!wanted.count(m.league)) continue;
      MatchInfo nm = m;
      nm.begin = out.events.size();
      out.events.insert(out.events.end(), corpus.events.begin() + m.begin,
                        corpus.events.begin() + m.end);
      nm.end = out.events.size();
      out.matches.push_back(std::move(nm));
    }
    if (!leagues.empty() && out.matches.empty()) {
      throw std::runtime_error("split selector matched zero matches");
    }
    return out;
  };

  std::set<std::string> all;
  for (const auto& l : spec.train_leagues)
    if (!all.insert(l).second)
      throw std::runtime_error("league in more than one split: " + l);
  for (const auto& l : spec.val_leagues)
    if (!all.insert(l).second)
      throw std::runtime_error("league in more than one split: " + l);
  for (const auto& l : spec.pool_leagues)
    if (!all.insert(l).second)
      throw std::runtime_error("league in more than one split: " + l);

  SplitResult res;
  res.train = take(spec.train_leagues);
  res.validation = take(spec.val_leagues);
  res.finetune_pool = take(spec.pool_leagues);
  return res;
}

}  // namespace lem
