#include "lem/nnet.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lem/rng.hpp"

namespace lem::nnet {

using nlohmann::json;

Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "relu") return Activation::kRelu;
  if (s == "linear") return Activation::kLinear;
  throw std::runtime_error("unknown activation: " + s);
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
    case Activation::kLinear: return "linear";
  }
  return "?";
}

int Network::targets_per_example() const {
  int n = 0;
  for (const auto& h : heads) n += h.kind == HeadKind::kCategorical ? 1 : h.size;
  return n;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw std::runtime_error("network has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.in <= 0 || l.out <= 0) throw std::runtime_error("non-positive layer dim");
    if (l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.b.size() != static_cast<std::size_t>(l.out)) {
      throw std::runtime_error("layer buffer size does not match dims");
    }
    if (k > 0 && layers[k - 1].out != l.in) {
      throw std::runtime_error("layer dimensions do not chain");
    }
  }
  int head_sum = 0;
  for (const auto& h : heads) {
    if (h.size <= 0) throw std::runtime_error("non-positive head size");
    head_sum += h.size;
  }
  if (head_sum != output_dim()) {
    throw std::runtime_error("head partition does not sum to output dim");
  }
}

Network make_network(int input_dim, const std::vector<int>& hidden,
                     const std::vector<Head>& heads, Activation hidden_act,
                     std::uint64_t seed) {
  int out_dim = 0;
  for (const auto& h : heads) out_dim += h.size;

  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden) dims.push_back(h);
  dims.push_back(out_dim);

  Rng rng(seed);
  Network net;
  net.heads = heads;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer l;
    l.in = dims[k];
    l.out = dims[k + 1];
    l.act = (k + 2 == dims.size()) ? Activation::kLinear : hidden_act;
    l.w.resize(static_cast<std::size_t>(l.in) * l.out);
    l.b.assign(static_cast<std::size_t>(l.out), 0.01f);
    double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (auto& w : l.w) {
      w = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
    }
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

namespace {

double dot_row(const float* w, const double* a, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(w[i]) * a[i];
    s1 += static_cast<double>(w[i + 1]) * a[i + 1];
    s2 += static_cast<double>(w[i + 2]) * a[i + 2];
    s3 += static_cast<double>(w[i + 3]) * a[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(w[i]) * a[i];
  return (s0 + s1) + (s2 + s3);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void apply_activation(Activation act, std::span<double> v) {
  switch (act) {
    case Activation::kSigmoid:
      for (auto& x : v) x = sigmoid(x);
      break;
    case Activation::kRelu:
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kLinear:
      break;
  }
}

void ensure_workspace(const Network& net, Workspace& ws) {
  if (ws.act.size() != net.layers.size()) {
    ws.act.resize(net.layers.size());
    ws.delta.resize(net.layers.size());
  }
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    ws.act[k].resize(static_cast<std::size_t>(net.layers[k].out));
    ws.delta[k].resize(static_cast<std::size_t>(net.layers[k].out));
  }
}

// Runs all layers; ws.act[k] holds layer k's post-activation (the last one is
// the raw logits since the projection layer is linear).
void forward_layers(const Network& net, std::span<const double> input,
                    Workspace& ws) {
  const double* src = input.data();
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& l = net.layers[k];
    double* dst = ws.act[k].data();
    for (int o = 0; o < l.out; ++o) {
      dst[o] = dot_row(&l.w[static_cast<std::size_t>(o) * l.in], src, l.in) +
               static_cast<double>(l.b[static_cast<std::size_t>(o)]);
    }
    apply_activation(l.act, ws.act[k]);
    src = dst;
  }
}

// Turns final-layer logits into per-head probabilities (softmax with
// max-subtraction, or element-wise sigmoid).
void heads_to_probs(const Network& net, std::span<const double> logits,
                    std::span<double> out) {
  int off = 0;
  for (const auto& h : net.heads) {
    if (h.kind == HeadKind::kCategorical) {
      double mx = logits[off];
      for (int i = 1; i < h.size; ++i) mx = std::max(mx, logits[off + i]);
      double sum = 0.0;
      for (int i = 0; i < h.size; ++i) {
        double e = std::exp(logits[off + i] - mx);
        out[off + i] = e;
        sum += e;
      }
      for (int i = 0; i < h.size; ++i) out[off + i] /= sum;
    } else {
      for (int i = 0; i < h.size; ++i) out[off + i] = sigmoid(logits[off + i]);
    }
    off += h.size;
  }
}

// Cross-entropy of one example from raw logits; also emits dL/dlogit when
// `dlogits` is non-null. Softmax+CE and sigmoid+BCE both reduce to p - t.
double example_loss(const Network& net, std::span<const double> logits,
                    const int* targets, double* dlogits) {
  double loss = 0.0;
  int off = 0;
  const int* t = targets;
  for (const auto& h : net.heads) {
    if (h.kind == HeadKind::kCategorical) {
      int cls = *t++;
      if (cls < 0 || cls >= h.size) {
        throw std::invalid_argument("target class out of head range");
      }
      double mx = logits[off];
      for (int i = 1; i < h.size; ++i) mx = std::max(mx, logits[off + i]);
      double sum = 0.0;
      for (int i = 0; i < h.size; ++i) sum += std::exp(logits[off + i] - mx);
      double lse = mx + std::log(sum);
      loss += lse - logits[off + cls];
      if (dlogits != nullptr) {
        for (int i = 0; i < h.size; ++i) {
          double p = std::exp(logits[off + i] - lse);
          dlogits[off + i] = p - (i == cls ? 1.0 : 0.0);
        }
      }
    } else {
      for (int i = 0; i < h.size; ++i) {
        int bit = *t++;
        if (bit != 0 && bit != 1) {
          throw std::invalid_argument("Bernoulli target must be 0/1");
        }
        double z = logits[off + i];
        loss += std::max(z, 0.0) - z * bit + std::log1p(std::exp(-std::abs(z)));
        if (dlogits != nullptr) dlogits[off + i] = sigmoid(z) - bit;
      }
    }
    off += h.size;
  }
  return loss;
}

void backward_layers(const Network& net, std::span<const double> input,
                     Workspace& ws, std::vector<std::vector<double>>& grad_w,
                     std::vector<std::vector<double>>& grad_b) {
  // ws.delta.back() already holds dL/dlogits.
  for (int k = static_cast<int>(net.layers.size()) - 1; k >= 0; --k) {
    const Layer& l = net.layers[static_cast<std::size_t>(k)];
    const double* delta = ws.delta[static_cast<std::size_t>(k)].data();
    const double* below =
        k == 0 ? input.data() : ws.act[static_cast<std::size_t>(k - 1)].data();

    double* gw = grad_w[static_cast<std::size_t>(k)].data();
    double* gb = grad_b[static_cast<std::size_t>(k)].data();
    for (int o = 0; o < l.out; ++o) {
      double d = delta[o];
      gb[o] += d;
      double* gw_row = gw + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) gw_row[i] += d * below[i];
    }

    if (k > 0) {
      auto& dprev = ws.delta[static_cast<std::size_t>(k - 1)];
      std::fill(dprev.begin(), dprev.end(), 0.0);
      for (int o = 0; o < l.out; ++o) {
        double d = delta[o];
        const float* w_row = &l.w[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) dprev[static_cast<std::size_t>(i)] += d * w_row[i];
      }
      // Chain through the previous layer's activation.
      const Layer& pl = net.layers[static_cast<std::size_t>(k - 1)];
      const auto& a = ws.act[static_cast<std::size_t>(k - 1)];
      switch (pl.act) {
        case Activation::kSigmoid:
          for (int i = 0; i < pl.out; ++i) {
            dprev[static_cast<std::size_t>(i)] *= a[static_cast<std::size_t>(i)] *
                                                  (1.0 - a[static_cast<std::size_t>(i)]);
          }
          break;
        case Activation::kRelu:
          for (int i = 0; i < pl.out; ++i) {
            if (a[static_cast<std::size_t>(i)] <= 0.0) dprev[static_cast<std::size_t>(i)] = 0.0;
          }
          break;
        case Activation::kLinear:
          break;
      }
    }
  }
}

void resize_like(const Network& net, std::vector<std::vector<double>>& gw,
                 std::vector<std::vector<double>>& gb) {
  gw.resize(net.layers.size());
  gb.resize(net.layers.size());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    gw[k].assign(net.layers[k].w.size(), 0.0);
    gb[k].assign(net.layers[k].b.size(), 0.0);
  }
}

}  // namespace

void forward(const Network& net, std::span<const double> input,
             std::span<double> out, Workspace& ws) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw std::invalid_argument("forward: input length " +
                                std::to_string(input.size()) + " != " +
                                std::to_string(net.input_dim()));
  }
  if (static_cast<int>(out.size()) != net.output_dim()) {
    throw std::invalid_argument("forward: output span has wrong length");
  }
  ensure_workspace(net, ws);
  forward_layers(net, input, ws);
  heads_to_probs(net, ws.act.back(), out);
}

std::vector<double> forward(const Network& net, std::span<const double> input) {
  std::vector<double> out(static_cast<std::size_t>(net.output_dim()));
  Workspace ws;
  forward(net, input, out, ws);
  return out;
}

double loss_gradient(const Network& net, const Dataset& data,
                     std::span<const std::uint32_t> rows,
                     std::vector<std::vector<double>>& grad_w,
                     std::vector<std::vector<double>>& grad_b, Workspace& ws) {
  ensure_workspace(net, ws);
  resize_like(net, grad_w, grad_b);

  const int in_dim = net.input_dim();
  const int tpe = net.targets_per_example();
  double total = 0.0;
  for (std::uint32_t r : rows) {
    std::span<const double> input(&data.inputs[static_cast<std::size_t>(r) * in_dim],
                                  static_cast<std::size_t>(in_dim));
    forward_layers(net, input, ws);
    total += example_loss(net, ws.act.back(),
                          &data.targets[static_cast<std::size_t>(r) * tpe],
                          ws.delta.back().data());
    backward_layers(net, input, ws, grad_w, grad_b);
  }
  double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& g : grad_w)
    for (auto& v : g) v *= inv;
  for (auto& g : grad_b)
    for (auto& v : g) v *= inv;
  return total * inv;
}

void AdamState::reset(const Network& net) {
  step = 0;
  mw.resize(net.layers.size());
  vw.resize(net.layers.size());
  mb.resize(net.layers.size());
  vb.resize(net.layers.size());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    mw[k].assign(net.layers[k].w.size(), 0.0);
    vw[k].assign(net.layers[k].w.size(), 0.0);
    mb[k].assign(net.layers[k].b.size(), 0.0);
    vb[k].assign(net.layers[k].b.size(), 0.0);
  }
}

bool AdamState::matches(const Network& net) const {
  if (mw.size() != net.layers.size()) return false;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (mw[k].size() != net.layers[k].w.size()) return false;
  }
  return true;
}

double train_step(Network& net, const Dataset& data,
                  std::span<const std::uint32_t> rows, const TrainConfig& cfg,
                  AdamState& adam, Workspace& ws) {
  if (rows.empty()) throw std::invalid_argument("train_step: empty batch");
  if (!adam.matches(net)) adam.reset(net);
  ensure_workspace(net, ws);

  const int in_dim = net.input_dim();
  const int tpe = net.targets_per_example();

  static thread_local std::vector<std::vector<double>> gw, gb;
  resize_like(net, gw, gb);

  double total = 0.0;
  for (std::size_t bi = 0; bi < rows.size(); ++bi) {
    std::uint32_t r = rows[bi];
    std::span<const double> input(&data.inputs[static_cast<std::size_t>(r) * in_dim],
                                  static_cast<std::size_t>(in_dim));
    forward_layers(net, input, ws);
    double l = example_loss(net, ws.act.back(),
                            &data.targets[static_cast<std::size_t>(r) * tpe],
                            ws.delta.back().data());
    if (!std::isfinite(l)) {
      throw TrainingDiverged("non-finite loss at batch element " +
                                 std::to_string(bi),
                             bi);
    }
    total += l;
    backward_layers(net, input, ws, gw, gb);
  }

  double inv = 1.0 / static_cast<double>(rows.size());
  double mean = total * inv;

  adam.step += 1;
  double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    Layer& l = net.layers[k];
    auto update = [&](std::vector<float>& p, std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        double gi = g[i] * inv;
        m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * gi;
        v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * gi * gi;
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] = static_cast<float>(static_cast<double>(p[i]) -
                                  cfg.learning_rate * mhat /
                                      (std::sqrt(vhat) + adam.eps));
      }
    };
    update(l.w, gw[k], adam.mw[k], adam.vw[k]);
    update(l.b, gb[k], adam.mb[k], adam.vb[k]);
  }
  return mean;
}

double mean_loss(const Network& net, const Dataset& data) {
  if (data.rows == 0) throw std::invalid_argument("mean_loss: empty dataset");
  Workspace ws;
  ensure_workspace(net, ws);
  const int in_dim = net.input_dim();
  const int tpe = net.targets_per_example();
  double total = 0.0;
  for (std::size_t r = 0; r < data.rows; ++r) {
    std::span<const double> input(&data.inputs[r * in_dim],
                                  static_cast<std::size_t>(in_dim));
    forward_layers(net, input, ws);
    total += example_loss(net, ws.act.back(), &data.targets[r * tpe], nullptr);
  }
  return total / static_cast<double>(data.rows);
}

FitResult fit(Network& net, const Dataset& train, const Dataset* val,
              const TrainConfig& cfg, bool keep_best_val) {
  if (train.rows == 0) throw std::invalid_argument("fit: empty training set");

  FitResult res;
  Rng rng(cfg.seed);
  AdamState adam;
  adam.reset(net);
  Workspace ws;

  std::vector<std::uint32_t> order(train.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<float>> best_w, best_b;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_indices(order, rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t n = std::min(static_cast<std::size_t>(cfg.batch_size),
                               order.size() - start);
      double l = train_step(net, train, {order.data() + start, n}, cfg, adam, ws);
      epoch_loss += l * static_cast<double>(n);
      seen += n;
    }
    res.train_loss.push_back(epoch_loss / static_cast<double>(seen));

    if (val != nullptr && val->rows > 0) {
      double vl = mean_loss(net, *val);
      res.val_loss.push_back(vl);
      if (vl < best_val) {
        best_val = vl;
        res.best_epoch = epoch;
        if (keep_best_val) {
          best_w.clear();
          best_b.clear();
          for (const auto& l : net.layers) {
            best_w.push_back(l.w);
            best_b.push_back(l.b);
          }
        }
      }
    } else {
      res.best_epoch = epoch;
    }
  }

  if (keep_best_val && !best_w.empty()) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      net.layers[k].w = best_w[k];
      net.layers[k].b = best_b[k];
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint IO

namespace {

constexpr char kMagic[4] = {'L', 'E', 'M', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void read_exact(std::istream& in, char* buf, std::size_t n, const char* what) {
  in.read(buf, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
  }
}

json architecture_meta(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"activation", to_string(l.act)}});
  }
  json heads = json::array();
  for (const auto& h : net.heads) {
    heads.push_back({{"kind", h.kind == HeadKind::kCategorical ? "categorical"
                                                               : "bernoulli"},
                     {"size", h.size}});
  }
  return json{{"layers", layers}, {"heads", heads}};
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net) {
  net.validate();

  json meta = net.meta.is_object() ? net.meta : json::object();
  json arch = architecture_meta(net);
  meta["layers"] = arch["layers"];
  meta["heads"] = arch["heads"];
  std::string meta_str = meta.dump();

  std::string payload;
  payload.reserve(net.parameter_count() * 4);
  auto put_f32 = [&payload](float f) {
    put_u32le(payload, std::bit_cast<std::uint32_t>(f));
  };
  for (const auto& l : net.layers) {
    for (float w : l.w) put_f32(w);
    for (float b : l.b) put_f32(b);
  }

  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));

  std::string header;
  header.append(kMagic, 4);
  put_u32le(header, kFormatVersion);
  put_u64le(header, meta_str.size());

  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  std::string tail;
  put_u32le(tail, crc);
  out.write(tail.data(), static_cast<std::streamsize>(tail.size()));
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Network read_checkpoint(std::istream& in) {
  char head[16];
  read_exact(in, head, sizeof(head), "header");
  if (std::memcmp(head, kMagic, 4) != 0) {
    throw std::runtime_error("bad checkpoint magic");
  }
  std::uint32_t version = get_u32le(reinterpret_cast<unsigned char*>(head + 4));
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version " +
                             std::to_string(version));
  }
  std::uint64_t meta_len = get_u64le(reinterpret_cast<unsigned char*>(head + 8));
  if (meta_len > (1u << 30)) throw std::runtime_error("checkpoint metadata too large");

  std::string meta_str(meta_len, '\0');
  read_exact(in, meta_str.data(), meta_len, "metadata");
  json meta = json::parse(meta_str);

  Network net;
  net.meta = meta;
  for (const auto& lj : meta.at("layers")) {
    Layer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.act = activation_from_string(lj.at("activation").get<std::string>());
    if (l.in <= 0 || l.out <= 0 || l.in > (1 << 20) || l.out > (1 << 20)) {
      throw std::runtime_error("checkpoint declares invalid layer dims");
    }
    l.w.resize(static_cast<std::size_t>(l.in) * l.out);
    l.b.resize(static_cast<std::size_t>(l.out));
    net.layers.push_back(std::move(l));
  }
  for (const auto& hj : meta.at("heads")) {
    Head h;
    std::string kind = hj.at("kind").get<std::string>();
    h.kind = kind == "categorical" ? HeadKind::kCategorical : HeadKind::kBernoulli;
    h.size = hj.at("size").get<int>();
    net.heads.push_back(h);
  }

  std::size_t payload_len = net.parameter_count() * 4;
  std::string payload(payload_len, '\0');
  read_exact(in, payload.data(), payload_len, "weights");

  char crc_buf[4];
  read_exact(in, crc_buf, 4, "checksum");
  std::uint32_t stored_crc = get_u32le(reinterpret_cast<unsigned char*>(crc_buf));
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
  if (crc != stored_crc) throw std::runtime_error("checkpoint checksum mismatch");

  const unsigned char* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (auto& l : net.layers) {
    for (auto& w : l.w) {
      w = std::bit_cast<float>(get_u32le(p));
      p += 4;
    }
    for (auto& b : l.b) {
      b = std::bit_cast<float>(get_u32le(p));
      p += 4;
    }
  }

  net.validate();  // also catches head/layer inconsistencies from metadata
  return net;
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  write_checkpoint(out, net);
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace lem::nnet
