// Command-line front end: ingest -> train -> finetune -> simulate -> report.
// Every command is deterministic given its arguments and emits a manifest
// (arguments + input file checksums) next to its primary output. Failures
// print a machine-readable error JSON on stderr and exit nonzero.
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lem/analytics.hpp"
#include "lem/cascade.hpp"
#include "lem/corpus.hpp"
#include "lem/sim.hpp"
#include "lem/train.hpp"
#include "lem/vocab.hpp"
#include "lem/wyscout.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lem;

namespace {

std::string crc32_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                static_cast<uInt>(in.gcount()));
  }
  char hex[16];
  std::snprintf(hex, sizeof(hex), "%08lx", static_cast<unsigned long>(crc));
  return hex;
}

void write_manifest(const fs::path& primary_output, const std::string& command,
                    const json& args, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
  json inputs_json = json::object();
  for (const auto& p : inputs) inputs_json[p.string()] = crc32_file(p);
  json outputs_json = json::array();
  for (const auto& p : outputs) outputs_json.push_back(p.string());
  json doc = {{"command", command},
              {"args", args},
              {"inputs", inputs_json},
              {"outputs", outputs_json}};
  fs::path path = primary_output;
  path += ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << doc.dump(2) << '\n';
}

std::pair<std::string, std::string> split_kv(const std::string& s, char sep) {
  auto pos = s.find(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
    throw std::runtime_error("expected NAME" + std::string(1, sep) + "VALUE, got: " + s);
  }
  return {s.substr(0, pos), s.substr(pos + 1)};
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::vector<std::string> events;
  std::vector<std::string> leagues;
  std::vector<std::string> matches_files;
  std::string mapping = "data/wyscout_type_mapping.json";
  std::string season;
  std::string on_unknown = "drop";
  std::string out;
  std::string csv;
};

void run_ingest(const IngestArgs& a) {
  if (!a.leagues.empty() && a.leagues.size() != 1 &&
      a.leagues.size() != a.events.size()) {
    throw std::runtime_error("--league must appear once or once per --events file");
  }
  TypeVocabulary vocab = TypeVocabulary::load(a.mapping);

  MatchSides sides;
  for (const auto& mf : a.matches_files) {
    std::ifstream min(mf);
    if (!min) throw std::runtime_error("cannot open matches file: " + mf);
    MatchSides part = parse_match_sides(min);
    sides.insert(part.begin(), part.end());
  }

  std::vector<Corpus> parts;
  json reports = json::array();
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    std::ifstream in(a.events[i], std::ios::binary);
    if (!in) throw std::runtime_error("cannot open events file: " + a.events[i]);
    IngestOptions opt;
    opt.season = a.season;
    opt.error_on_unknown_type = a.on_unknown == "error";
    if (a.leagues.size() == 1) opt.league = a.leagues[0];
    else if (!a.leagues.empty()) opt.league = a.leagues[i];
    IngestReport report;
    parts.push_back(parse_events(in, vocab, opt,
                                 &report, sides.empty() ? nullptr : &sides));
    reports.push_back({{"file", a.events[i]},
                       {"league", opt.league},
                       {"raw_records", report.raw_records},
                       {"kept", report.kept},
                       {"dropped", report.dropped},
                       {"matches_without_side_info",
                        report.matches_without_side_info}});
  }

  Corpus corpus = merge_corpora(parts);
  corpus.validate();
  write_corpus(corpus, a.out);
  if (!a.csv.empty()) write_corpus_csv(corpus, vocab, a.csv);

  json args = {{"events", a.events},     {"leagues", a.leagues},
               {"matches", a.matches_files}, {"mapping", a.mapping},
               {"season", a.season},     {"on_unknown", a.on_unknown},
               {"out", a.out},           {"csv", a.csv}};
  std::vector<fs::path> inputs;
  for (const auto& e : a.events) inputs.emplace_back(e);
  inputs.emplace_back(a.mapping);
  for (const auto& mf : a.matches_files) inputs.emplace_back(mf);
  std::vector<fs::path> outputs = {a.out};
  if (!a.csv.empty()) outputs.emplace_back(a.csv);
  write_manifest(a.out, "ingest", args, inputs, outputs);

  std::cout << json{{"n_events", corpus.n_events()},
                    {"n_matches", corpus.n_matches()},
                    {"reports", reports}}
                   .dump(2)
            << '\n';
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string corpus;
  std::vector<std::string> train_leagues;
  std::vector<std::string> val_leagues;
  std::string train_corpus;  // alternative to league selectors
  std::string val_corpus;
  std::string mapping = "data/wyscout_type_mapping.json";
  int epochs = 5;
  std::uint64_t seed = 0;
  std::string out;
};

void run_train(const TrainArgs& a) {
  Corpus train_c, val_c;
  std::vector<fs::path> inputs;

  if (!a.train_leagues.empty() || !a.val_leagues.empty()) {
    if (a.corpus.empty()) {
      throw std::runtime_error("--train-leagues/--val-leagues need --corpus");
    }
    Corpus all = read_corpus(a.corpus);
    SplitSpec spec;
    spec.train_leagues = a.train_leagues;
    spec.val_leagues = a.val_leagues;
    SplitResult split = split_corpus(all, spec);
    train_c = std::move(split.train);
    val_c = std::move(split.validation);
    inputs.emplace_back(a.corpus);
  } else {
    if (a.train_corpus.empty() || a.val_corpus.empty()) {
      throw std::runtime_error(
          "need either --corpus with league selectors or --train-corpus and --val-corpus");
    }
    train_c = read_corpus(a.train_corpus);
    val_c = read_corpus(a.val_corpus);
    inputs.emplace_back(a.train_corpus);
    inputs.emplace_back(a.val_corpus);
  }

  // The cascade embeds the vocabulary; it must be the one the corpus was
  // ingested with.
  TypeVocabulary vocab = TypeVocabulary::load(a.mapping);
  if (!train_c.mapping_version.empty() &&
      train_c.mapping_version != vocab.version()) {
    throw std::runtime_error("corpus was ingested with mapping '" +
                             train_c.mapping_version + "' but --mapping is '" +
                             vocab.version() + "'");
  }

  CascadeTrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  ModelCascade cascade = train_base(train_c, val_c, vocab, cfg);
  save_cascade(cascade, a.out);
  inputs.emplace_back(a.mapping);

  json args = {{"corpus", a.corpus},
               {"train_leagues", a.train_leagues},
               {"val_leagues", a.val_leagues},
               {"train_corpus", a.train_corpus},
               {"val_corpus", a.val_corpus},
               {"mapping", a.mapping},
               {"epochs", a.epochs},
               {"seed", a.seed},
               {"out", a.out}};
  write_manifest(a.out, "train", args, inputs, {a.out});
  std::cout << cascade.meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// finetune

struct FinetuneArgs {
  std::string base;
  std::string corpus;
  std::string job;  // JSON job descriptor, alternative to the flags below
  std::string kind = "team";
  std::optional<std::int64_t> team_id;
  std::optional<std::int64_t> player_id;
  std::optional<std::int64_t> replaced_player_id;
  bool home_only = true;
  int epochs = 25;
  std::uint64_t seed = 0;
  int repeats = 1;
  int batch = 0;
  std::string out_prefix;
};

void run_finetune(FinetuneArgs a) {
  if (!a.job.empty()) {
    std::ifstream jin(a.job);
    if (!jin) throw std::runtime_error("cannot open job descriptor: " + a.job);
    json job = json::parse(jin);
    a.base = job.value("base", a.base);
    a.corpus = job.value("corpus", a.corpus);
    a.kind = job.value("kind", a.kind);
    if (job.contains("team_id")) a.team_id = job["team_id"].get<std::int64_t>();
    if (job.contains("player_id")) a.player_id = job["player_id"].get<std::int64_t>();
    if (job.contains("replaced_player_id")) {
      a.replaced_player_id = job["replaced_player_id"].get<std::int64_t>();
    }
    a.home_only = job.value("home_only", a.home_only);
    a.epochs = job.value("epochs", a.epochs);
    a.seed = job.value("seed", a.seed);
    a.repeats = job.value("repeats", a.repeats);
    a.batch = job.value("batch", a.batch);
    a.out_prefix = job.value("out_prefix", a.out_prefix);
  }
  if (a.base.empty() || a.corpus.empty() || a.out_prefix.empty()) {
    throw std::runtime_error("finetune needs --base, --corpus and --out-prefix");
  }
  if (a.repeats < 1) throw std::runtime_error("--repeats must be >= 1");

  FineTuneSpec spec;
  spec.kind = finetune_kind_from_string(a.kind);
  spec.team_id = a.team_id;
  spec.player_id = a.player_id;
  spec.replaced_player_id = a.replaced_player_id;
  spec.home_only = a.home_only;
  spec.validate();

  ModelCascade base = load_cascade(a.base);
  Corpus pool = read_corpus(a.corpus);
  auto pairs = build_pairs(pool);
  auto selected = select_finetune_pairs(pairs, spec);

  json spec_json = {{"kind", a.kind}, {"home_only", a.home_only}};
  if (a.team_id) spec_json["team_id"] = *a.team_id;
  if (a.player_id) spec_json["player_id"] = *a.player_id;
  if (a.replaced_player_id) spec_json["replaced_player_id"] = *a.replaced_player_id;

  std::vector<fs::path> outputs;
  json runs = json::array();
  for (int r = 0; r < a.repeats; ++r) {
    FineTuneConfig cfg;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed + static_cast<std::uint64_t>(r);
    cfg.batch_override = a.batch;
    ModelCascade tuned = finetune(base, selected, spec, cfg);
    tuned.meta["finetune"]["repeat_index"] = r;
    fs::path out = a.out_prefix + "_r" + std::to_string(r) + ".lemc";
    save_cascade(tuned, out);
    outputs.push_back(out);
    runs.push_back({{"checkpoint", out.string()}, {"seed", cfg.seed}});
  }

  // Job descriptor mirroring the resolved parameters; reusable via --job.
  json desc = spec_json;
  desc["base"] = a.base;
  desc["corpus"] = a.corpus;
  desc["epochs"] = a.epochs;
  desc["seed"] = a.seed;
  desc["repeats"] = a.repeats;
  desc["batch"] = a.batch;
  desc["out_prefix"] = a.out_prefix;
  fs::path desc_path = a.out_prefix + ".job.json";
  {
    std::ofstream dout(desc_path);
    dout << desc.dump(2) << '\n';
  }
  outputs.push_back(desc_path);

  write_manifest(desc_path, "finetune", desc, {a.base, a.corpus}, outputs);

  std::cout << json{{"n_selected_pairs", selected.size()},
                    {"batch_size",
                     a.batch > 0 ? a.batch
                                 : finetune_batch_size(
                                       static_cast<double>(selected.size()))},
                    {"runs", runs}}
                   .dump(2)
            << '\n';
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string checkpoint;
  int n_sims = 2500;
  std::uint64_t seed = 0;
  int threads = 0;
  double temperature = 1.0;
  double half_length = 47.0;
  int max_events = 4000;
  bool is_home = true;  // false mirrors the analysis to the away side
  std::string out_csv = "results.csv";
  std::string out_summary = "summary.json";
};

void run_simulate(const SimulateArgs& a) {
  ModelCascade cascade = load_cascade(a.checkpoint);
  BatchConfig cfg;
  cfg.n_simulations = a.n_sims;
  cfg.base_seed = a.seed;
  cfg.threads = a.threads;
  cfg.temperature = a.temperature;
  cfg.half_length_minutes = a.half_length;
  cfg.max_events_per_match = a.max_events;

  BatchResult batch = simulate_batch(cascade, cfg);
  BatchSummary summary =
      a.is_home ? batch.summary : summarize(batch.results, cfg.base_seed, false);

  write_results_csv(a.out_csv, batch.results, cascade.vocab);
  write_summary_json(a.out_summary, summary);

  json args = {{"checkpoint", a.checkpoint}, {"n_sims", a.n_sims},
               {"seed", a.seed},             {"threads", a.threads},
               {"temperature", a.temperature}, {"half_length", a.half_length},
               {"max_events", a.max_events}, {"is_home", a.is_home},
               {"out_csv", a.out_csv},       {"out_summary", a.out_summary}};
  write_manifest(a.out_summary, "simulate", args, {a.checkpoint},
                 {a.out_csv, a.out_summary});

  std::cout << json{{"expected_points", summary.expected_points},
                    {"std_error", summary.std_error},
                    {"wins", summary.wins},
                    {"draws", summary.draws},
                    {"losses", summary.losses},
                    {"truncated_rate", summary.truncated_rate}}
                   .dump(2)
            << '\n';
}

// ---------------------------------------------------------------------------
// league

struct LeagueArgs {
  std::vector<std::string> team_summaries;  // NAME=summary.json
  std::string reference;                    // CSV: team,rank
  std::string mapping = "data/wyscout_type_mapping.json";
  int top_k = 6;
  std::string out = "league.csv";
  std::string out_summary;
  std::string stats_csv;
};

std::map<std::string, int> read_reference_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference table: " + path.string());
  std::map<std::string, int> ranks;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    auto [team, rank] = split_kv(line, ',');
    ranks[team] = std::stoi(rank);
  }
  return ranks;
}

void run_league(const LeagueArgs& a) {
  TypeVocabulary vocab = TypeVocabulary::load(a.mapping);
  std::vector<TeamExpectation> teams;
  std::vector<std::pair<std::string, MatchStats>> stats_rows;
  std::vector<fs::path> inputs = {a.reference};
  for (const auto& kv : a.team_summaries) {
    auto [name, path] = split_kv(kv, '=');
    BatchSummary s = read_summary_json(path);
    teams.push_back({name, s.expected_points});
    stats_rows.push_back({name, stats_from_summary(s, vocab)});
    inputs.emplace_back(path);
  }

  LeagueProjection projection =
      project_league(teams, read_reference_csv(a.reference), a.top_k);
  write_league_csv(a.out, projection);
  std::vector<fs::path> outputs = {a.out};
  if (!a.out_summary.empty()) {
    write_league_summary_json(a.out_summary, projection);
    outputs.emplace_back(a.out_summary);
  }
  if (!a.stats_csv.empty()) {
    write_stats_csv(a.stats_csv, stats_rows);
    outputs.emplace_back(a.stats_csv);
  }

  json args = {{"teams", a.team_summaries},
               {"reference", a.reference},
               {"mapping", a.mapping},
               {"top_k", a.top_k},
               {"out", a.out},
               {"out_summary", a.out_summary},
               {"stats_csv", a.stats_csv}};
  write_manifest(a.out, "league", args, inputs, outputs);

  std::cout << json{{"avg_displacement", projection.avg_displacement},
                    {"topk_avg_displacement", projection.topk_avg_displacement}}
                   .dump(2)
            << '\n';
}

// ---------------------------------------------------------------------------
// scenario

struct ScenarioArgs {
  std::string baseline;                // summary.json
  std::vector<std::string> scenarios;  // NAME=summary.json
  int bootstrap = 2000;
  std::uint64_t bootstrap_seed = 0;
  std::string out_prefix = "scenario";
};

void run_scenario(const ScenarioArgs& a) {
  std::vector<std::pair<std::string, std::vector<int>>> batches;
  std::vector<fs::path> inputs = {a.baseline};
  batches.push_back({"baseline", read_summary_json(a.baseline).points});
  for (const auto& kv : a.scenarios) {
    auto [name, path] = split_kv(kv, '=');
    batches.push_back({name, read_summary_json(path).points});
    inputs.emplace_back(path);
  }

  PointsDistribution dist =
      points_distribution(batches, a.bootstrap_seed, a.bootstrap);

  fs::path long_csv = a.out_prefix + "_long.csv";
  fs::path summary_csv = a.out_prefix + "_summary.csv";
  fs::path boot_csv = a.out_prefix + "_bootstrap.csv";
  write_distribution_long_csv(long_csv, batches);
  write_distribution_summary_csv(summary_csv, dist);
  {
    std::ofstream out(boot_csv);
    if (!out) throw std::runtime_error("cannot open for write: " + boot_csv.string());
    out << "scenario,bootstrap_index,season_points\n";
    for (const auto& sc : dist.scenarios) {
      for (std::size_t i = 0; i < sc.season_samples.size(); ++i) {
        out << sc.name << ',' << i << ',' << sc.season_samples[i] << '\n';
      }
    }
  }

  json args = {{"baseline", a.baseline},
               {"scenarios", a.scenarios},
               {"bootstrap", a.bootstrap},
               {"bootstrap_seed", a.bootstrap_seed},
               {"out_prefix", a.out_prefix}};
  write_manifest(summary_csv, "scenario", args, inputs,
                 {long_csv, summary_csv, boot_csv});

  json deltas = json::array();
  for (const auto& sc : dist.scenarios) {
    deltas.push_back({{"scenario", sc.name},
                      {"mean", sc.mean},
                      {"mean_delta", sc.mean_delta},
                      {"variance_delta", sc.variance_delta}});
  }
  std::cout << deltas.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soccer large-events model: train, fine-tune and simulate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value config file");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Parse Wyscout-style event JSON");
  ingest->add_option("--events", ingest_args.events, "Event JSON file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--league", ingest_args.leagues,
                     "League label (one, or one per events file)");
  ingest->add_option("--matches", ingest_args.matches_files,
                     "Matches sidecar JSON fixing home sides (repeatable)")
      ->check(CLI::ExistingFile);
  ingest->add_option("--mapping", ingest_args.mapping, "Type mapping table")
      ->capture_default_str()
      ->check(CLI::ExistingFile);
  ingest->add_option("--season", ingest_args.season, "Season label");
  ingest->add_option("--on-unknown", ingest_args.on_unknown, "drop|error")
      ->check(CLI::IsMember({"drop", "error"}))
      ->capture_default_str();
  ingest->add_option("--out", ingest_args.out, "Output corpus file")->required();
  ingest->add_option("--csv", ingest_args.csv, "Optional CSV export");
  ingest->callback([&] { run_ingest(ingest_args); });

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the base model cascade");
  train->add_option("--corpus", train_args.corpus, "Merged corpus file");
  train->add_option("--train-leagues", train_args.train_leagues, "League selectors")
      ->delimiter(',');
  train->add_option("--val-leagues", train_args.val_leagues, "League selectors")
      ->delimiter(',');
  train->add_option("--train-corpus", train_args.train_corpus, "Training corpus file");
  train->add_option("--val-corpus", train_args.val_corpus, "Validation corpus file");
  train->add_option("--mapping", train_args.mapping)->capture_default_str();
  train->add_option("--epochs", train_args.epochs)->capture_default_str();
  train->add_option("--seed", train_args.seed)->capture_default_str();
  train->add_option("--out", train_args.out, "Output cascade checkpoint")->required();
  train->callback([&] { run_train(train_args); });

  FinetuneArgs ft_args;
  auto* ft = app.add_subcommand("finetune", "Fine-tune a base cascade on a subset");
  ft->add_option("--job", ft_args.job, "Job descriptor JSON (overrides flags)");
  ft->add_option("--base", ft_args.base, "Base cascade checkpoint");
  ft->add_option("--corpus", ft_args.corpus, "Fine-tune pool corpus");
  ft->add_option("--kind", ft_args.kind,
                 "team|player|player_addition|player_replacement")
      ->capture_default_str();
  ft->add_option("--team-id", ft_args.team_id);
  ft->add_option("--player-id", ft_args.player_id);
  ft->add_option("--replaced-player-id", ft_args.replaced_player_id);
  ft->add_flag("--home-only,!--no-home-only", ft_args.home_only,
               "Restrict team pairs to home matches");
  ft->add_option("--epochs", ft_args.epochs)->capture_default_str();
  ft->add_option("--seed", ft_args.seed)->capture_default_str();
  ft->add_option("--repeats", ft_args.repeats, "Independent fine-tune repetitions")
      ->capture_default_str();
  ft->add_option("--batch", ft_args.batch, "Batch-size override (0 = rule)")
      ->capture_default_str();
  ft->add_option("--out-prefix", ft_args.out_prefix, "Checkpoint name prefix");
  ft->callback([&] { run_finetune(ft_args); });

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo match simulation");
  sim->add_option("--checkpoint", sim_args.checkpoint)->required()->check(
      CLI::ExistingFile);
  sim->add_option("--n-sims", sim_args.n_sims)->capture_default_str();
  sim->add_option("--seed", sim_args.seed)->capture_default_str();
  sim->add_option("--threads", sim_args.threads)->capture_default_str();
  sim->add_option("--temperature", sim_args.temperature)->capture_default_str();
  sim->add_option("--half-length", sim_args.half_length)->capture_default_str();
  sim->add_option("--max-events", sim_args.max_events)->capture_default_str();
  sim->add_option("--is-home", sim_args.is_home,
                  "true scores the home side, false mirrors to the away side")
      ->capture_default_str();
  sim->add_option("--out-csv", sim_args.out_csv)->capture_default_str();
  sim->add_option("--out-summary", sim_args.out_summary)->capture_default_str();
  sim->callback([&] { run_simulate(sim_args); });

  LeagueArgs league_args;
  auto* league = app.add_subcommand("league", "Project a league table");
  league->add_option("--team", league_args.team_summaries,
                     "NAME=summary.json (repeat per team)")
      ->required();
  league->add_option("--reference", league_args.reference,
                     "Reference table CSV (team,rank)")
      ->required()
      ->check(CLI::ExistingFile);
  league->add_option("--mapping", league_args.mapping)->capture_default_str();
  league->add_option("--top-k", league_args.top_k)->capture_default_str();
  league->add_option("--out", league_args.out)->capture_default_str();
  league->add_option("--out-summary", league_args.out_summary);
  league->add_option("--stats-csv", league_args.stats_csv,
                     "Per-team per-game stats table");
  league->callback([&] { run_league(league_args); });

  ScenarioArgs sc_args;
  auto* sc = app.add_subcommand("scenario",
                                "Baseline vs transfer-scenario distributions");
  sc->add_option("--baseline", sc_args.baseline, "Baseline summary.json")
      ->required()
      ->check(CLI::ExistingFile);
  sc->add_option("--scenario", sc_args.scenarios, "NAME=summary.json (repeatable)")
      ->required();
  sc->add_option("--bootstrap", sc_args.bootstrap)->capture_default_str();
  sc->add_option("--bootstrap-seed", sc_args.bootstrap_seed)->capture_default_str();
  sc->add_option("--out-prefix", sc_args.out_prefix)->capture_default_str();
  sc->callback([&] { run_scenario(sc_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
