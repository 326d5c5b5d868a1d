#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace lem::nnet {

enum class Activation { kSigmoid, kRelu, kLinear };

Activation activation_from_string(const std::string& s);
const char* to_string(Activation a);

// An output head interprets one contiguous segment of the final logits:
// a categorical head becomes a softmax distribution over `size` classes, a
// Bernoulli head becomes `size` independent sigmoid probabilities.
enum class HeadKind { kCategorical, kBernoulli };

struct Head {
  HeadKind kind = HeadKind::kCategorical;
  int size = 0;
};

struct Layer {
  int in = 0;
  int out = 0;
  Activation act = Activation::kLinear;
  std::vector<float> w;  // row-major [out][in]
  std::vector<float> b;  // [out]
};

// A plain feed-forward network. Weights are stored as 32-bit floats (the
// checkpoint unit); all arithmetic runs in double. The final layer is always
// linear; the heads turn its logits into probabilities.
struct Network {
  std::vector<Layer> layers;
  std::vector<Head> heads;
  nlohmann::json meta;  // architecture + training provenance, serialized

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  int targets_per_example() const;  // 1 per categorical head, `size` per Bernoulli
  std::size_t parameter_count() const;
  void validate() const;  // throws if dims do not chain or heads do not sum
};

// Builds a network with the given hidden widths (hidden layers use
// `hidden_act`, the projection layer is linear). Weights are uniform with
// fan-in scaling, biases start at 0.01.
Network make_network(int input_dim, const std::vector<int>& hidden,
                     const std::vector<Head>& heads, Activation hidden_act,
                     std::uint64_t seed);

// Per-thread scratch for forward/backward passes; reuse across calls to
// avoid allocation in hot loops.
struct Workspace {
  std::vector<std::vector<double>> act;    // post-activation per layer
  std::vector<std::vector<double>> delta;  // backprop buffers
};

// Runs the network on one input and writes the per-head probability segments
// (concatenated, same length as the final layer) to `out`.
void forward(const Network& net, std::span<const double> input,
             std::span<double> out, Workspace& ws);
std::vector<double> forward(const Network& net, std::span<const double> input);

// Training data in columnar form. `targets` holds, per example, one class
// index per categorical head followed by one 0/1 value per Bernoulli output,
// in head order.
struct Dataset {
  std::vector<double> inputs;  // row-major rows x input_dim
  std::vector<int> targets;    // rows x targets_per_example
  std::size_t rows = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 1;
  std::uint64_t seed = 0;
};

// Adam with the usual defaults; moments in double.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> mw, vw, mb, vb;

  void reset(const Network& net);
  bool matches(const Network& net) const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t batch_index)
      : std::runtime_error(what), batch_index(batch_index) {}
  std::size_t batch_index;
};

// One optimizer step on one batch (rows given by `rows` as indices into
// `data`). Returns the mean loss over the batch before the update. Throws
// TrainingDiverged on a non-finite loss.
double train_step(Network& net, const Dataset& data,
                  std::span<const std::uint32_t> rows, const TrainConfig& cfg,
                  AdamState& adam, Workspace& ws);

// Mean loss over a whole dataset, forward only.
double mean_loss(const Network& net, const Dataset& data);

// Gradient of the mean batch loss w.r.t. every parameter, laid out layer by
// layer (weights then biases). Returns the mean loss. Exposed for the
// finite-difference checks.
double loss_gradient(const Network& net, const Dataset& data,
                     std::span<const std::uint32_t> rows,
                     std::vector<std::vector<double>>& grad_w,
                     std::vector<std::vector<double>>& grad_b, Workspace& ws);

struct FitResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch (empty when no val set)
  int best_epoch = -1;             // epoch whose weights were kept
};

// Epoch loop: seeded shuffle, minibatches, optional validation scoring.
// With `keep_best_val` the weights revert to the best-validation epoch.
FitResult fit(Network& net, const Dataset& train, const Dataset* val,
              const TrainConfig& cfg, bool keep_best_val);

// Checkpoint format: "LEM1" magic, u32 format version, u64 metadata length,
// JSON metadata (architecture, head partition, provenance), then per layer
// the row-major weight matrix and bias vector as little-endian f32, then a
// CRC32 of that payload.
void write_checkpoint(std::ostream& out, const Network& net);
Network read_checkpoint(std::istream& in);
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace lem::nnet
