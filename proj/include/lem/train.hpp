#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lem/cascade.hpp"
#include "lem/corpus.hpp"
#include "lem/event.hpp"
#include "lem/nnet.hpp"

namespace lem {

struct PairTargets {
  int type_id = 0;
  int is_accurate = 0;
  int is_goal = 0;
  int x_bin = 0;
  int y_bin = 0;
  int time_bin = 0;  // clamp(floor(minute(k+1) - minute(k)), 0, 59)
  int is_home = 0;
};

// One supervised example: the state after event k, and the fields of event
// k+1 the cascade must predict. Selection metadata (who acts in the target
// event) rides along for the fine-tuning subsets.
struct TrainingPair {
  GameState context;
  PairTargets target;
  std::int64_t target_team_id = -1;
  std::int64_t target_player_id = -1;
  std::int64_t match_id = -1;
};

// One pair per consecutive intra-match adjacency; matches with fewer than two
// events contribute nothing. Pair count is sum over matches of (events - 1).
std::vector<TrainingPair> build_pairs(const Corpus& corpus);

enum class FineTuneKind { kTeam, kPlayer, kPlayerAddition, kPlayerReplacement };

FineTuneKind finetune_kind_from_string(const std::string& s);
const char* to_string(FineTuneKind k);

struct FineTuneSpec {
  FineTuneKind kind = FineTuneKind::kTeam;
  std::optional<std::int64_t> team_id;
  std::optional<std::int64_t> player_id;
  std::optional<std::int64_t> replaced_player_id;
  bool home_only = true;

  void validate() const;  // required ids per kind
};

// Membership is decided by the target event's actor. Team pairs are the
// team's target events (home matches only when home_only); Player pairs are
// the player's target events anywhere; PlayerAddition is the union;
// PlayerReplacement removes the outgoing player's pairs from the union.
// An empty selection is an error.
std::vector<TrainingPair> select_finetune_pairs(std::span<const TrainingPair> pairs,
                                                const FineTuneSpec& spec);

// Batch-size rule for fine-tuning: clamp(round(2*log2(n)), 32, 256) where n
// is the number of fine-tuning examples. Monotone non-decreasing in n.
int finetune_batch_size(double n_events);

struct StageConfig {
  std::vector<int> hidden;
  double learning_rate = 1e-3;
  int batch_size = 32;
  nnet::Activation activation = nnet::Activation::kSigmoid;
};

// Defaults are the base-training hyperparameters of the three stages.
struct CascadeTrainConfig {
  StageConfig type_stage{{256}, 0.0010, 32, nnet::Activation::kSigmoid};
  StageConfig accuracy_stage{{128}, 0.0410, 1024, nnet::Activation::kSigmoid};
  StageConfig data_stage{{64, 256, 256}, 0.0063, 1024, nnet::Activation::kRelu};
  int epochs = 5;
  std::uint64_t seed = 0;
  bool parallel_stages = true;
};

// Trains the three stages from scratch on the training corpus, scoring each
// epoch on the validation corpus and keeping the best-validation weights.
// Hyperparameters and per-epoch losses land in the checkpoint metadata.
ModelCascade train_base(const Corpus& train_corpus, const Corpus& val_corpus,
                        const TypeVocabulary& vocab,
                        const CascadeTrainConfig& cfg = {});

struct FineTuneConfig {
  int epochs = 25;  // budget; all epochs run, final weights kept
  std::uint64_t seed = 0;
  int batch_override = 0;  // 0 = use finetune_batch_size(|pairs|)
  bool parallel_stages = true;
};

// Continues training every stage on the selected pairs at 1/10th of the
// stage's base learning rate. The base cascade is left untouched; the
// fine-tune provenance is recorded in the returned checkpoint's metadata.
ModelCascade finetune(const ModelCascade& base, std::span<const TrainingPair> pairs,
                      const FineTuneSpec& spec, const FineTuneConfig& cfg);

// Per-stage dataset builders (also used by the test oracles).
nnet::Dataset make_type_dataset(std::span<const TrainingPair> pairs);
nnet::Dataset make_accuracy_dataset(std::span<const TrainingPair> pairs);
nnet::Dataset make_data_dataset(std::span<const TrainingPair> pairs);

}  // namespace lem
