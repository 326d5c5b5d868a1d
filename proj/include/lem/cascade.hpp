#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "lem/event.hpp"
#include "lem/nnet.hpp"
#include "lem/rng.hpp"
#include "lem/vocab.hpp"

namespace lem {

// The three-stage next-event model. Stage order is fixed: the type is
// sampled before the accuracy/goal flags are predicted, and those are
// sampled before the location/time/side stage sees them.
//
//   type_net     42 -> 33   P(next type | state)
//   accuracy_net 75 -> 2    P(accurate), P(goal)   [state ++ sampled type]
//   data_net     77 -> 264  x(101), y(101), elapsed minutes(60), is_home(2)
struct ModelCascade {
  static constexpr int kStateDim = 42;
  static constexpr int kTypeDim = 33;
  static constexpr int kAccuracyInDim = 75;
  static constexpr int kDataInDim = 77;
  static constexpr int kXBins = 101;
  static constexpr int kYBins = 101;
  static constexpr int kTimeBins = 60;

  nnet::Network type_net;
  nnet::Network accuracy_net;
  nnet::Network data_net;
  TypeVocabulary vocab;
  nlohmann::json meta;

  void validate() const;  // throws unless dims are exactly 42/33, 75/2, 77/264
};

// Standard head layouts for the three stages.
std::vector<nnet::Head> type_heads();
std::vector<nnet::Head> accuracy_heads();
std::vector<nnet::Head> data_heads();

struct DataProbs {
  std::vector<double> x;        // 101
  std::vector<double> y;        // 101
  std::vector<double> time;     // 60
  std::vector<double> is_home;  // 2
};

// Per-thread evaluator owning the forward scratch buffers; a ModelCascade is
// immutable and may be shared across any number of evaluators.
class CascadeEvaluator {
 public:
  explicit CascadeEvaluator(const ModelCascade& cascade);

  const ModelCascade& cascade() const { return *c_; }

  // 33-way distribution over the next event type.
  std::span<const double> predict_type(const GameState& state);

  // (p_accurate, p_goal) for the sampled type; p_goal is forced to 0 when
  // the type cannot produce a goal. type_onehot must be an exact one-hot.
  std::pair<double, double> predict_accuracy(const GameState& state,
                                             std::span<const double> type_onehot);

  // The four categorical heads of the data stage.
  DataProbs predict_data(const GameState& state,
                         std::span<const double> type_onehot, double is_accurate,
                         double is_goal);

  // Runs the three stages in order, sampling each by inverse CDF on the rng
  // stream. Identical weights + state + rng position give identical events.
  PredictedEvent sample(const GameState& state, Rng& rng, double temperature = 1.0);

 private:
  const ModelCascade* c_;
  nnet::Workspace ws_type_, ws_acc_, ws_data_;
  std::vector<double> in_acc_, in_data_;
  std::vector<double> out_type_, out_acc_, out_data_;
  std::vector<double> scratch_;
};

// One-shot conveniences (allocate an evaluator internally).
std::vector<double> predict_type(const ModelCascade& c, const GameState& s);
std::pair<double, double> predict_accuracy(const ModelCascade& c, const GameState& s,
                                           std::span<const double> type_onehot);
DataProbs predict_data(const ModelCascade& c, const GameState& s,
                       std::span<const double> type_onehot, double is_accurate,
                       double is_goal);
PredictedEvent sample_event(const ModelCascade& c, const GameState& s, Rng& rng,
                            double temperature = 1.0);

// Container checkpoint: "LEMC" magic, u32 version, u64 metadata length, JSON
// metadata (embedded type vocabulary, head split, provenance), then the three
// stage checkpoints, each length-prefixed.
void save_cascade(const ModelCascade& c, const std::filesystem::path& path);
ModelCascade load_cascade(const std::filesystem::path& path);
void write_cascade(std::ostream& out, const ModelCascade& c);
ModelCascade read_cascade(std::istream& in);

}  // namespace lem
