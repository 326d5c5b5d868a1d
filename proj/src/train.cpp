#include "lem/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace lem {

using nlohmann::json;

std::vector<TrainingPair> build_pairs(const Corpus& corpus) {
  std::vector<TrainingPair> pairs;
  if (corpus.events.size() > corpus.matches.size()) {
    pairs.reserve(corpus.events.size() - corpus.matches.size());
  }
  for (const auto& m : corpus.matches) {
    if (m.size() < 2) continue;
    for (std::size_t i = m.begin; i + 1 < m.end; ++i) {
      const Event& cur = corpus.events[i];
      const Event& nxt = corpus.events[i + 1];
      TrainingPair p;
      p.context = encode_state(cur);
      p.target.type_id = nxt.type_id;
      p.target.is_accurate = nxt.is_accurate;
      p.target.is_goal = nxt.is_goal;
      p.target.x_bin = static_cast<int>(
          std::clamp<long>(std::lround(nxt.x * 100.0), 0, 100));
      p.target.y_bin = static_cast<int>(
          std::clamp<long>(std::lround(nxt.y * 100.0), 0, 100));
      p.target.time_bin = static_cast<int>(std::clamp(
          std::floor(nxt.minute - cur.minute), 0.0, 59.0));
      p.target.is_home = nxt.is_home;
      p.target_team_id = nxt.team_id;
      p.target_player_id = nxt.player_id;
      p.match_id = m.match_id;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

FineTuneKind finetune_kind_from_string(const std::string& s) {
  if (s == "team") return FineTuneKind::kTeam;
  if (s == "player") return FineTuneKind::kPlayer;
  if (s == "player_addition") return FineTuneKind::kPlayerAddition;
  if (s == "player_replacement") return FineTuneKind::kPlayerReplacement;
  throw std::runtime_error("unknown fine-tune kind: " + s);
}

const char* to_string(FineTuneKind k) {
  switch (k) {
    case FineTuneKind::kTeam: return "team";
    case FineTuneKind::kPlayer: return "player";
    case FineTuneKind::kPlayerAddition: return "player_addition";
    case FineTuneKind::kPlayerReplacement: return "player_replacement";
  }
  return "?";
}

void FineTuneSpec::validate() const {
  auto need = [](bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(std::string("fine-tune spec needs ") + what);
  };
  switch (kind) {
    case FineTuneKind::kTeam:
      need(team_id.has_value(), "team_id");
      break;
    case FineTuneKind::kPlayer:
      need(player_id.has_value(), "player_id");
      break;
    case FineTuneKind::kPlayerAddition:
      need(team_id.has_value(), "team_id");
      need(player_id.has_value(), "player_id");
      break;
    case FineTuneKind::kPlayerReplacement:
      need(team_id.has_value(), "team_id");
      need(player_id.has_value(), "player_id");
      need(replaced_player_id.has_value(), "replaced_player_id");
      break;
  }
}

std::vector<TrainingPair> select_finetune_pairs(std::span<const TrainingPair> pairs,
                                                const FineTuneSpec& spec) {
  spec.validate();

  auto team_side = [&spec](const TrainingPair& p) {
    return p.target_team_id == *spec.team_id &&
           (!spec.home_only || p.target.is_home == 1);
  };
  auto player_side = [&spec](const TrainingPair& p) {
    return p.target_player_id == *spec.player_id;
  };

  std::vector<TrainingPair> out;
  for (const auto& p : pairs) {
    bool in = false;
    switch (spec.kind) {
      case FineTuneKind::kTeam:
        in = team_side(p);
        break;
      case FineTuneKind::kPlayer:
        in = player_side(p);
        break;
      case FineTuneKind::kPlayerAddition:
        in = team_side(p) || player_side(p);
        break;
      case FineTuneKind::kPlayerReplacement:
        in = (team_side(p) || player_side(p)) &&
             p.target_player_id != *spec.replaced_player_id;
        break;
    }
    if (in) out.push_back(p);
  }
  if (out.empty()) {
    throw std::runtime_error("fine-tune selection matched zero pairs");
  }
  return out;
}

int finetune_batch_size(double n_events) {
  if (!(n_events >= 1.0)) {
    throw std::invalid_argument("finetune_batch_size requires n >= 1");
  }
  long long raw = std::llround(2.0 * std::log2(n_events));
  return static_cast<int>(std::clamp<long long>(raw, 32, 256));
}

// ---------------------------------------------------------------------------
// Dataset builders

nnet::Dataset make_type_dataset(std::span<const TrainingPair> pairs) {
  nnet::Dataset d;
  d.rows = pairs.size();
  d.inputs.resize(d.rows * GameState::kDim);
  d.targets.resize(d.rows);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    std::copy(pairs[r].context.v.begin(), pairs[r].context.v.end(),
              d.inputs.begin() + r * GameState::kDim);
    d.targets[r] = pairs[r].target.type_id;
  }
  return d;
}

nnet::Dataset make_accuracy_dataset(std::span<const TrainingPair> pairs) {
  nnet::Dataset d;
  const int in_dim = ModelCascade::kAccuracyInDim;
  d.rows = pairs.size();
  d.inputs.assign(d.rows * in_dim, 0.0);
  d.targets.resize(d.rows * 2);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    double* row = &d.inputs[r * in_dim];
    std::copy(pairs[r].context.v.begin(), pairs[r].context.v.end(), row);
    row[GameState::kDim + pairs[r].target.type_id] = 1.0;
    d.targets[r * 2] = pairs[r].target.is_accurate;
    d.targets[r * 2 + 1] = pairs[r].target.is_goal;
  }
  return d;
}

nnet::Dataset make_data_dataset(std::span<const TrainingPair> pairs) {
  nnet::Dataset d;
  const int in_dim = ModelCascade::kDataInDim;
  d.rows = pairs.size();
  d.inputs.assign(d.rows * in_dim, 0.0);
  d.targets.resize(d.rows * 4);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    double* row = &d.inputs[r * in_dim];
    const auto& t = pairs[r].target;
    std::copy(pairs[r].context.v.begin(), pairs[r].context.v.end(), row);
    row[GameState::kDim + t.type_id] = 1.0;
    row[75] = t.is_accurate;
    row[76] = t.is_goal;
    d.targets[r * 4] = t.x_bin;
    d.targets[r * 4 + 1] = t.y_bin;
    d.targets[r * 4 + 2] = t.time_bin;
    d.targets[r * 4 + 3] = t.is_home;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Base training and fine-tuning

namespace {

struct StageJob {
  nnet::Network* net;
  const nnet::Dataset* train;
  const nnet::Dataset* val;
  nnet::TrainConfig cfg;
  bool keep_best_val;
  nnet::FitResult result;
  std::exception_ptr error;
};

void run_stages(std::vector<StageJob>& jobs, bool parallel) {
  auto run_one = [](StageJob& job) {
    try {
      job.result = nnet::fit(*job.net, *job.train, job.val, job.cfg, job.keep_best_val);
    } catch (...) {
      job.error = std::current_exception();
    }
  };
  if (parallel && jobs.size() > 1) {
    std::vector<std::thread> threads;
    threads.reserve(jobs.size());
    for (auto& job : jobs) threads.emplace_back(run_one, std::ref(job));
    for (auto& t : threads) t.join();
  } else {
    for (auto& job : jobs) run_one(job);
  }
  for (auto& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
  }
}

json stage_meta(const StageConfig& sc, const nnet::TrainConfig& tc,
                const nnet::FitResult& fr, std::size_t n_pairs) {
  return json{{"hidden", sc.hidden},
              {"activation", nnet::to_string(sc.activation)},
              {"learning_rate", tc.learning_rate},
              {"batch_size", tc.batch_size},
              {"epochs", tc.max_epochs},
              {"seed", tc.seed},
              {"n_pairs", n_pairs},
              {"train_loss", fr.train_loss},
              {"val_loss", fr.val_loss},
              {"best_epoch", fr.best_epoch}};
}

}  // namespace

ModelCascade train_base(const Corpus& train_corpus, const Corpus& val_corpus,
                        const TypeVocabulary& vocab,
                        const CascadeTrainConfig& cfg) {
  if (train_corpus.n_events() == 0) {
    throw std::invalid_argument("train_base: empty training corpus");
  }
  if (val_corpus.n_events() == 0) {
    throw std::invalid_argument("train_base: empty validation corpus");
  }

  auto train_pairs = build_pairs(train_corpus);
  auto val_pairs = build_pairs(val_corpus);
  if (train_pairs.empty() || val_pairs.empty()) {
    throw std::invalid_argument("train_base: corpora yield no training pairs");
  }

  nnet::Dataset type_train = make_type_dataset(train_pairs);
  nnet::Dataset type_val = make_type_dataset(val_pairs);
  nnet::Dataset acc_train = make_accuracy_dataset(train_pairs);
  nnet::Dataset acc_val = make_accuracy_dataset(val_pairs);
  nnet::Dataset data_train = make_data_dataset(train_pairs);
  nnet::Dataset data_val = make_data_dataset(val_pairs);

  ModelCascade c;
  c.vocab = vocab;
  c.type_net = nnet::make_network(ModelCascade::kStateDim, cfg.type_stage.hidden,
                                  type_heads(), cfg.type_stage.activation,
                                  cfg.seed);
  c.accuracy_net = nnet::make_network(ModelCascade::kAccuracyInDim,
                                      cfg.accuracy_stage.hidden, accuracy_heads(),
                                      cfg.accuracy_stage.activation, cfg.seed + 1);
  c.data_net = nnet::make_network(ModelCascade::kDataInDim, cfg.data_stage.hidden,
                                  data_heads(), cfg.data_stage.activation,
                                  cfg.seed + 2);

  auto tc = [&cfg](const StageConfig& sc, std::uint64_t seed_offset) {
    nnet::TrainConfig t;
    t.learning_rate = sc.learning_rate;
    t.batch_size = sc.batch_size;
    t.max_epochs = cfg.epochs;
    t.seed = cfg.seed + seed_offset;
    return t;
  };

  std::vector<StageJob> jobs;
  jobs.push_back({&c.type_net, &type_train, &type_val, tc(cfg.type_stage, 10), true, {}, nullptr});
  jobs.push_back({&c.accuracy_net, &acc_train, &acc_val, tc(cfg.accuracy_stage, 11), true, {}, nullptr});
  jobs.push_back({&c.data_net, &data_train, &data_val, tc(cfg.data_stage, 12), true, {}, nullptr});
  run_stages(jobs, cfg.parallel_stages);

  c.type_net.meta["training"] =
      stage_meta(cfg.type_stage, jobs[0].cfg, jobs[0].result, train_pairs.size());
  c.accuracy_net.meta["training"] =
      stage_meta(cfg.accuracy_stage, jobs[1].cfg, jobs[1].result, train_pairs.size());
  c.data_net.meta["training"] =
      stage_meta(cfg.data_stage, jobs[2].cfg, jobs[2].result, train_pairs.size());

  c.meta = json{{"kind", "base"},
                {"seed", cfg.seed},
                {"epochs", cfg.epochs},
                {"n_train_pairs", train_pairs.size()},
                {"n_val_pairs", val_pairs.size()},
                {"stages",
                 {{"type", c.type_net.meta["training"]},
                  {"accuracy", c.accuracy_net.meta["training"]},
                  {"data", c.data_net.meta["training"]}}}};
  return c;
}

ModelCascade finetune(const ModelCascade& base, std::span<const TrainingPair> pairs,
                      const FineTuneSpec& spec, const FineTuneConfig& cfg) {
  spec.validate();
  if (pairs.empty()) throw std::invalid_argument("finetune: no pairs");
  if (cfg.epochs < 0 || cfg.epochs > 25) {
    throw std::invalid_argument("finetune: epoch budget must be in [0, 25]");
  }

  ModelCascade tuned = base;

  nnet::Dataset type_data = make_type_dataset(pairs);
  nnet::Dataset acc_data = make_accuracy_dataset(pairs);
  nnet::Dataset data_data = make_data_dataset(pairs);

  int batch = cfg.batch_override > 0
                  ? cfg.batch_override
                  : finetune_batch_size(static_cast<double>(pairs.size()));

  CascadeTrainConfig defaults;
  auto base_lr = [](const nnet::Network& net, double fallback) {
    if (net.meta.contains("training") && net.meta["training"].contains("learning_rate")) {
      return net.meta["training"]["learning_rate"].get<double>();
    }
    return fallback;
  };

  auto tc = [&](double lr, std::uint64_t seed_offset) {
    nnet::TrainConfig t;
    t.learning_rate = lr / 10.0;  // fine-tuning runs at a tenth of the base rate
    t.batch_size = batch;
    t.max_epochs = cfg.epochs;
    t.seed = cfg.seed + seed_offset;
    return t;
  };

  std::vector<StageJob> jobs;
  jobs.push_back({&tuned.type_net, &type_data, nullptr,
                  tc(base_lr(base.type_net, defaults.type_stage.learning_rate), 20),
                  false, {}, nullptr});
  jobs.push_back({&tuned.accuracy_net, &acc_data, nullptr,
                  tc(base_lr(base.accuracy_net, defaults.accuracy_stage.learning_rate), 21),
                  false, {}, nullptr});
  jobs.push_back({&tuned.data_net, &data_data, nullptr,
                  tc(base_lr(base.data_net, defaults.data_stage.learning_rate), 22),
                  false, {}, nullptr});

  if (cfg.epochs > 0) {
    run_stages(jobs, cfg.parallel_stages);
  }

  json spec_json = {{"kind", to_string(spec.kind)},
                    {"home_only", spec.home_only}};
  if (spec.team_id) spec_json["team_id"] = *spec.team_id;
  if (spec.player_id) spec_json["player_id"] = *spec.player_id;
  if (spec.replaced_player_id) spec_json["replaced_player_id"] = *spec.replaced_player_id;

  json ft = {{"spec", spec_json},
             {"seed", cfg.seed},
             {"epochs", cfg.epochs},
             {"batch_size", batch},
             {"n_pairs", pairs.size()}};

  auto annotate = [&](nnet::Network& net, const StageJob& job) {
    if (!net.meta.is_object()) net.meta = json::object();
    json rec = ft;
    rec["learning_rate"] = job.cfg.learning_rate;
    rec["train_loss"] = job.result.train_loss;
    net.meta["finetune"] = rec;
  };
  annotate(tuned.type_net, jobs[0]);
  annotate(tuned.accuracy_net, jobs[1]);
  annotate(tuned.data_net, jobs[2]);

  if (!tuned.meta.is_object()) tuned.meta = json::object();
  tuned.meta["kind"] = "finetune";
  tuned.meta["finetune"] = ft;
  return tuned;
}

}  // namespace lem
