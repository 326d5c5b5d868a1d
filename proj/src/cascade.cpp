#include "lem/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lem {

using nlohmann::json;

std::vector<nnet::Head> type_heads() {
  return {{nnet::HeadKind::kCategorical, ModelCascade::kTypeDim}};
}

std::vector<nnet::Head> accuracy_heads() {
  return {{nnet::HeadKind::kBernoulli, 2}};
}

std::vector<nnet::Head> data_heads() {
  return {{nnet::HeadKind::kCategorical, ModelCascade::kXBins},
          {nnet::HeadKind::kCategorical, ModelCascade::kYBins},
          {nnet::HeadKind::kCategorical, ModelCascade::kTimeBins},
          {nnet::HeadKind::kCategorical, 2}};
}

void ModelCascade::validate() const {
  type_net.validate();
  accuracy_net.validate();
  data_net.validate();
  if (type_net.input_dim() != kStateDim || type_net.output_dim() != kTypeDim) {
    throw std::runtime_error("type net must be 42 -> 33");
  }
  if (accuracy_net.input_dim() != kAccuracyInDim || accuracy_net.output_dim() != 2) {
    throw std::runtime_error("accuracy net must be 75 -> 2");
  }
  if (data_net.input_dim() != kDataInDim || data_net.output_dim() != 264) {
    throw std::runtime_error("data net must be 77 -> 264");
  }
  auto expect = [](const std::vector<nnet::Head>& got,
                   const std::vector<nnet::Head>& want, const char* name) {
    if (got.size() != want.size()) {
      throw std::runtime_error(std::string(name) + ": unexpected head layout");
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].kind != want[i].kind || got[i].size != want[i].size) {
        throw std::runtime_error(std::string(name) + ": unexpected head layout");
      }
    }
  };
  expect(type_net.heads, type_heads(), "type net");
  expect(accuracy_net.heads, accuracy_heads(), "accuracy net");
  expect(data_net.heads, data_heads(), "data net");
}

CascadeEvaluator::CascadeEvaluator(const ModelCascade& cascade) : c_(&cascade) {
  c_->validate();
  in_acc_.resize(ModelCascade::kAccuracyInDim);
  in_data_.resize(ModelCascade::kDataInDim);
  out_type_.resize(ModelCascade::kTypeDim);
  out_acc_.resize(2);
  out_data_.resize(264);
  scratch_.resize(ModelCascade::kTypeDim);
}

std::span<const double> CascadeEvaluator::predict_type(const GameState& state) {
  nnet::forward(c_->type_net, state.v, out_type_, ws_type_);
  return out_type_;
}

namespace {

int checked_onehot_index(std::span<const double> onehot) {
  if (onehot.size() != ModelCascade::kTypeDim) {
    throw std::invalid_argument("type one-hot must have length 33");
  }
  int hot = -1;
  for (int i = 0; i < ModelCascade::kTypeDim; ++i) {
    if (onehot[i] == 1.0) {
      if (hot >= 0) throw std::invalid_argument("type one-hot has two hot entries");
      hot = i;
    } else if (onehot[i] != 0.0) {
      throw std::invalid_argument("type one-hot entries must be 0 or 1");
    }
  }
  if (hot < 0) throw std::invalid_argument("type one-hot has no hot entry");
  return hot;
}

// Temperature on an already-normalized categorical; T=1 leaves the exact
// forward probabilities untouched.
void apply_temperature(std::span<double> p, double t) {
  if (t == 1.0) return;
  if (!(t > 0.0)) throw std::invalid_argument("temperature must be positive");
  double sum = 0.0;
  for (auto& v : p) {
    v = std::pow(v, 1.0 / t);
    sum += v;
  }
  for (auto& v : p) v /= sum;
}

}  // namespace

std::pair<double, double> CascadeEvaluator::predict_accuracy(
    const GameState& state, std::span<const double> type_onehot) {
  int type_id = checked_onehot_index(type_onehot);
  std::copy(state.v.begin(), state.v.end(), in_acc_.begin());
  std::copy(type_onehot.begin(), type_onehot.end(),
            in_acc_.begin() + GameState::kDim);
  nnet::forward(c_->accuracy_net, in_acc_, out_acc_, ws_acc_);
  double p_goal = c_->vocab.goal_capable(type_id) ? out_acc_[1] : 0.0;
  return {out_acc_[0], p_goal};
}

DataProbs CascadeEvaluator::predict_data(const GameState& state,
                                         std::span<const double> type_onehot,
                                         double is_accurate, double is_goal) {
  checked_onehot_index(type_onehot);
  std::copy(state.v.begin(), state.v.end(), in_data_.begin());
  std::copy(type_onehot.begin(), type_onehot.end(),
            in_data_.begin() + GameState::kDim);
  in_data_[75] = is_accurate;
  in_data_[76] = is_goal;
  nnet::forward(c_->data_net, in_data_, out_data_, ws_data_);

  DataProbs out;
  out.x.assign(out_data_.begin(), out_data_.begin() + 101);
  out.y.assign(out_data_.begin() + 101, out_data_.begin() + 202);
  out.time.assign(out_data_.begin() + 202, out_data_.begin() + 262);
  out.is_home.assign(out_data_.begin() + 262, out_data_.end());
  return out;
}

PredictedEvent CascadeEvaluator::sample(const GameState& state, Rng& rng,
                                        double temperature) {
  // Stage 1: type.
  nnet::forward(c_->type_net, state.v, out_type_, ws_type_);
  std::copy(out_type_.begin(), out_type_.end(), scratch_.begin());
  apply_temperature({scratch_.data(), scratch_.size()}, temperature);
  int type_id = rng.categorical({scratch_.data(), scratch_.size()});

  // Stage 2: accuracy and goal flags, conditioned on the sampled type.
  std::copy(state.v.begin(), state.v.end(), in_acc_.begin());
  std::fill(in_acc_.begin() + GameState::kDim, in_acc_.end(), 0.0);
  in_acc_[GameState::kDim + type_id] = 1.0;
  nnet::forward(c_->accuracy_net, in_acc_, out_acc_, ws_acc_);
  double p_goal = c_->vocab.goal_capable(type_id) ? out_acc_[1] : 0.0;
  int is_accurate = rng.bernoulli(out_acc_[0]);
  int is_goal = rng.bernoulli(p_goal);

  // Stage 3: location, elapsed time, acting side.
  std::copy(in_acc_.begin(), in_acc_.end(), in_data_.begin());
  in_data_[75] = is_accurate;
  in_data_[76] = is_goal;
  nnet::forward(c_->data_net, in_data_, out_data_, ws_data_);

  auto sample_head = [&](int offset, int size) {
    std::span<double> seg(out_data_.data() + offset, static_cast<std::size_t>(size));
    apply_temperature(seg, temperature);
    return rng.categorical(seg);
  };
  PredictedEvent pred;
  pred.type_id = type_id;
  pred.is_accurate = is_accurate;
  pred.is_goal = is_goal;
  pred.x_bin = sample_head(0, 101);
  pred.y_bin = sample_head(101, 101);
  pred.time_elapsed_bin = sample_head(202, 60);
  pred.is_home = sample_head(262, 2);
  return pred;
}

std::vector<double> predict_type(const ModelCascade& c, const GameState& s) {
  CascadeEvaluator ev(c);
  auto span = ev.predict_type(s);
  return {span.begin(), span.end()};
}

std::pair<double, double> predict_accuracy(const ModelCascade& c, const GameState& s,
                                           std::span<const double> type_onehot) {
  CascadeEvaluator ev(c);
  return ev.predict_accuracy(s, type_onehot);
}

DataProbs predict_data(const ModelCascade& c, const GameState& s,
                       std::span<const double> type_onehot, double is_accurate,
                       double is_goal) {
  CascadeEvaluator ev(c);
  return ev.predict_data(s, type_onehot, is_accurate, is_goal);
}

PredictedEvent sample_event(const ModelCascade& c, const GameState& s, Rng& rng,
                            double temperature) {
  CascadeEvaluator ev(c);
  return ev.sample(s, rng, temperature);
}

// ---------------------------------------------------------------------------
// Container checkpoint

namespace {

constexpr char kMagic[4] = {'L', 'E', 'M', 'C'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u64le(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw std::runtime_error("cascade checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (in.gcount() != 8) throw std::runtime_error("cascade checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void write_blob(std::ostream& out, const std::string& blob) {
  write_u64le(out, blob.size());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

std::string read_blob(std::istream& in) {
  std::uint64_t len = read_u64le(in);
  if (len > (1ull << 32)) throw std::runtime_error("cascade blob too large");
  std::string blob(len, '\0');
  in.read(blob.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) {
    throw std::runtime_error("cascade checkpoint truncated");
  }
  return blob;
}

}  // namespace

void write_cascade(std::ostream& out, const ModelCascade& c) {
  c.validate();
  json meta = c.meta.is_object() ? c.meta : json::object();
  meta["type_vocabulary_version"] = c.vocab.version();
  meta["type_vocabulary"] = json::parse(c.vocab.json_text());
  meta["data_head_split"] = {{"x", 101}, {"y", 101}, {"time", 60}, {"is_home", 2}};
  std::string meta_str = meta.dump();

  out.write(kMagic, 4);
  write_u32le(out, kFormatVersion);
  write_blob(out, meta_str);

  for (const nnet::Network* net : {&c.type_net, &c.accuracy_net, &c.data_net}) {
    std::ostringstream blob(std::ios::binary);
    nnet::write_checkpoint(blob, *net);
    write_blob(out, blob.str());
  }
  if (!out) throw std::runtime_error("cascade checkpoint write failed");
}

ModelCascade read_cascade(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("bad cascade checkpoint magic");
  }
  std::uint32_t version = read_u32le(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported cascade format version " +
                             std::to_string(version));
  }

  ModelCascade c;
  std::string meta_str = read_blob(in);
  c.meta = json::parse(meta_str);
  c.vocab = TypeVocabulary::from_json(c.meta.at("type_vocabulary").dump());

  for (nnet::Network* net : {&c.type_net, &c.accuracy_net, &c.data_net}) {
    std::istringstream blob(read_blob(in), std::ios::binary);
    *net = nnet::read_checkpoint(blob);
  }
  c.validate();
  return c;
}

void save_cascade(const ModelCascade& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  write_cascade(out, c);
}

ModelCascade load_cascade(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cascade checkpoint: " + path.string());
  return read_cascade(in);
}

}  // namespace lem
