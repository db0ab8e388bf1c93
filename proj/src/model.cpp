/*
 * Copyright 2026 The widir Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "widir/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>
#include <type_traits>

#include "widir/data_io.hpp"
#include "widir/random.hpp"

namespace widir {
namespace {

constexpr int kBranchWidth = 64;
constexpr int kInteractionWidth = 16;
constexpr int kDeepWidth = 128;
constexpr int kDeepInput = 2 * kBranchWidth + kInteractionWidth;
constexpr int kCombinedOutput = 4;
constexpr std::size_t kColumnBlock = 32;
constexpr char kMagic[8] = {'W', 'I', 'D', 'I', 'R', 'M', 'D', 'L'};

std::size_t Index(Component c) { return static_cast<std::size_t>(c); }

// out[o, n] = (sum_k w[o, k] * x[k, n]) + b[o], optionally rectified. Each
// output element is reduced over k in ascending order with separate multiply
// and add, independent of `cols` and of the blocking below.
template <typename T>
void DenseForward(const DenseLayer<T>& layer, const T* x, std::size_t cols, T* out, bool relu) {
  const std::size_t in = static_cast<std::size_t>(layer.in);
  const std::size_t out_dim = static_cast<std::size_t>(layer.out);
  const T* w = layer.weight.data();
  std::size_t o = 0;
  for (; o + 4 <= out_dim; o += 4) {
    const T* w0 = w + (o + 0) * in;
    const T* w1 = w + (o + 1) * in;
    const T* w2 = w + (o + 2) * in;
    const T* w3 = w + (o + 3) * in;
    for (std::size_t n0 = 0; n0 < cols; n0 += kColumnBlock) {
      const std::size_t nb = std::min(kColumnBlock, cols - n0);
      T a0[kColumnBlock] = {};
      T a1[kColumnBlock] = {};
      T a2[kColumnBlock] = {};
      T a3[kColumnBlock] = {};
      for (std::size_t k = 0; k < in; ++k) {
        const T* xr = x + k * cols + n0;
        const T c0 = w0[k], c1 = w1[k], c2 = w2[k], c3 = w3[k];
        for (std::size_t j = 0; j < nb; ++j) {
          const T xv = xr[j];
          a0[j] += c0 * xv;
          a1[j] += c1 * xv;
          a2[j] += c2 * xv;
          a3[j] += c3 * xv;
        }
      }
      T* acc[4] = {a0, a1, a2, a3};
      for (std::size_t i = 0; i < 4; ++i) {
        T* dst = out + (o + i) * cols + n0;
        const T b = layer.bias[o + i];
        for (std::size_t j = 0; j < nb; ++j) {
          const T v = acc[i][j] + b;
          dst[j] = relu && !(v > T(0)) ? T(0) : v;
        }
      }
    }
  }
  for (; o < out_dim; ++o) {
    const T* wo = w + o * in;
    for (std::size_t n0 = 0; n0 < cols; n0 += kColumnBlock) {
      const std::size_t nb = std::min(kColumnBlock, cols - n0);
      T a[kColumnBlock] = {};
      for (std::size_t k = 0; k < in; ++k) {
        const T* xr = x + k * cols + n0;
        const T c = wo[k];
        for (std::size_t j = 0; j < nb; ++j) a[j] += c * xr[j];
      }
      T* dst = out + o * cols + n0;
      const T b = layer.bias[o];
      for (std::size_t j = 0; j < nb; ++j) {
        const T v = a[j] + b;
        dst[j] = relu && !(v > T(0)) ? T(0) : v;
      }
    }
  }
}

// Given dA (overwritten with dZ), accumulates weight/bias gradients and, when
// `dx` is non-null, writes dX = W^T dZ.
template <typename T>
void DenseBackward(const DenseLayer<T>& layer, const T* x, const T* a, std::size_t cols, T* da,
                   DenseLayer<T>& grad, T* dx, bool relu, std::vector<T>& xt) {
  const std::size_t in = static_cast<std::size_t>(layer.in);
  const std::size_t out_dim = static_cast<std::size_t>(layer.out);
  if (relu) {
    for (std::size_t i = 0; i < out_dim * cols; ++i) {
      if (!(a[i] > T(0))) da[i] = T(0);
    }
  }
  xt.resize(cols * in);
  for (std::size_t k = 0; k < in; ++k)
    for (std::size_t n = 0; n < cols; ++n) xt[n * in + k] = x[k * cols + n];

  std::vector<char> live(out_dim, 0);
  for (std::size_t o = 0; o < out_dim; ++o) {
    const T* dz = da + o * cols;
    T* gw = grad.weight.data() + o * in;
    T db = T(0);
    for (std::size_t n = 0; n < cols; ++n) {
      const T s = dz[n];
      if (s == T(0)) continue;
      live[o] = 1;
      db += s;
      const T* xr = xt.data() + n * in;
      for (std::size_t k = 0; k < in; ++k) gw[k] += s * xr[k];
    }
    grad.bias[o] += db;
  }
  if (dx == nullptr) return;
  std::fill(dx, dx + in * cols, T(0));
  for (std::size_t o = 0; o < out_dim; ++o) {
    if (!live[o]) continue;
    const T* dz = da + o * cols;
    const T* wo = layer.weight.data() + o * in;
    for (std::size_t k = 0; k < in; ++k) {
      const T w = wo[k];
      if (w == T(0)) continue;
      T* dxr = dx + k * cols;
      for (std::size_t n = 0; n < cols; ++n) dxr[n] += w * dz[n];
    }
  }
}

template <typename T>
void ToFeatureMajor(std::span<const float> items, std::size_t dims, std::size_t count,
                    std::vector<T>& out) {
  out.resize(dims * count);
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t k = 0; k < dims; ++k) out[k * count + n] = static_cast<T>(items[n * dims + k]);
}

void CheckSize(std::string_view component, std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw DimensionError(std::string(component) + ": expected " + std::to_string(expected) +
                         " input values, got " + std::to_string(got));
  }
}

// Runs a chain of layers; outputs[l] receives layer l's activation.
template <typename T>
void RunChain(const std::vector<DenseLayer<T>>& layers, const T* input, std::size_t cols,
              std::vector<std::vector<T>>& outputs, bool relu_last) {
  outputs.resize(layers.size());
  const T* x = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    outputs[l].resize(static_cast<std::size_t>(layers[l].out) * cols);
    const bool relu = l + 1 < layers.size() || relu_last;
    DenseForward(layers[l], x, cols, outputs[l].data(), relu);
    x = outputs[l].data();
  }
}

// Backpropagates through a chain whose last layer output gradient is in
// `d_out`; writes the chain input gradient to `d_in` when non-null.
template <typename T>
void BackChain(const std::vector<DenseLayer<T>>& layers, const T* input, std::size_t cols,
               const std::vector<std::vector<T>>& outputs, std::vector<T> d_out,
               std::vector<DenseLayer<T>>& grads, std::type_identity_t<std::vector<T>>* d_in, bool relu_last,
               std::vector<T>& scratch) {
  for (std::size_t l = layers.size(); l-- > 0;) {
    const T* x = l == 0 ? input : outputs[l - 1].data();
    const bool relu = l + 1 < layers.size() || relu_last;
    const bool need_dx = l > 0 || d_in != nullptr;
    std::vector<T> dx(need_dx ? static_cast<std::size_t>(layers[l].in) * cols : 0);
    DenseBackward(layers[l], x, outputs[l].data(), cols, d_out.data(), grads[l],
                  need_dx ? dx.data() : nullptr, relu, scratch);
    d_out = std::move(dx);
  }
  if (d_in != nullptr) *d_in = std::move(d_out);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF32(std::string& out, float v) { PutU32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ModelFormatError(ModelFormatError::Kind::kCorrupt, "model stream truncated");
    }
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::string_view Take(std::size_t n) {
    Need(n);
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view ComponentName(Component component) {
  switch (component) {
    case Component::kPlayerBranch:
      return "PlayerBranch";
    case Component::kContestBranch:
      return "ContestBranch";
    case Component::kInteractionBranch:
      return "InteractionBranch";
    case Component::kWideBranch:
      return "WideBranch";
    case Component::kDeepBranch:
      return "DeepBranch";
    case Component::kCombinedLayers:
      return "CombinedLayers";
    case Component::kFinalRanking:
      return "FinalRanking";
  }
  return "?";
}

std::array<std::vector<LayerShape>, kNumComponents> Architecture(const WidirDims& dims) {
  std::array<std::vector<LayerShape>, kNumComponents> a;
  a[Index(Component::kPlayerBranch)] = {{dims.player, kBranchWidth}, {kBranchWidth, kBranchWidth}};
  a[Index(Component::kContestBranch)] = {{dims.contest, kBranchWidth},
                                         {kBranchWidth, kBranchWidth}};
  // Three 16-unit layers: the only flow consistent with the 16*d_i + 560 count.
  a[Index(Component::kInteractionBranch)] = {{dims.interaction, kInteractionWidth},
                                             {kInteractionWidth, kInteractionWidth},
                                             {kInteractionWidth, kInteractionWidth}};
  a[Index(Component::kWideBranch)] = {{dims.player + dims.contest + dims.interaction, 1}};
  a[Index(Component::kDeepBranch)] = {{kDeepInput, kDeepWidth},
                                      {kDeepWidth, kDeepWidth},
                                      {kDeepWidth, kDeepWidth},
                                      {kDeepWidth, kDeepWidth}};
  a[Index(Component::kCombinedLayers)] = {
      {kDeepWidth, 64}, {64, 64}, {64, 32}, {32, 8}, {8, kCombinedOutput}};
  a[Index(Component::kFinalRanking)] = {{kCombinedOutput + 1, 4}, {4, 1}};
  return a;
}

ParamCounts ParamCount(const WidirDims& dims) {
  ParamCounts c;
  const long long dp = dims.player, dc = dims.contest, di = dims.interaction;
  c.per_component = {64 * dp + 4224, 64 * dc + 4224, 16 * di + 560, dp + dc + di + 1,
                     68096,          14796,          29};
  c.total = 65 * dp + 65 * dc + 17 * di + 91930;
  return c;
}

template <typename T>
std::size_t BasicParams<T>::ComponentCount(Component c) const {
  std::size_t n = 0;
  for (const auto& layer : (*this)[c]) n += layer.size();
  return n;
}

template <typename T>
std::size_t BasicParams<T>::Count() const {
  std::size_t n = 0;
  for (Component c : kAllComponents) n += ComponentCount(c);
  return n;
}

template <typename T>
void BasicParams<T>::SetZero() {
  ForEach([](T& v) { v = T(0); });
}

template <typename T>
template <typename U>
BasicParams<U> BasicParams<T>::Cast() const {
  BasicParams<U> out;
  out.dims = dims;
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    for (const auto& layer : components[c]) {
      DenseLayer<U> l;
      l.in = layer.in;
      l.out = layer.out;
      l.weight.assign(layer.weight.begin(), layer.weight.end());
      l.bias.assign(layer.bias.begin(), layer.bias.end());
      out.components[c].push_back(std::move(l));
    }
  }
  return out;
}

template <typename T>
BasicParams<T> ZeroParams(const WidirDims& dims) {
  if (dims.player <= 0 || dims.contest <= 0 || dims.interaction <= 0) {
    throw DimensionError("feature dimensions must be positive");
  }
  BasicParams<T> p;
  p.dims = dims;
  const auto arch = Architecture(dims);
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    for (const LayerShape& s : arch[c]) {
      DenseLayer<T> layer;
      layer.in = s.in;
      layer.out = s.out;
      layer.weight.assign(static_cast<std::size_t>(s.in) * s.out, T(0));
      layer.bias.assign(static_cast<std::size_t>(s.out), T(0));
      p.components[c].push_back(std::move(layer));
    }
  }
  return p;
}

template <typename T>
BasicParams<T> InitParams(const WidirDims& dims, std::uint64_t seed) {
  BasicParams<T> p = ZeroParams<T>(dims);
  Rng rng(DeriveSeed(seed, {0x1a17}));
  for (auto& layers : p.components) {
    for (auto& layer : layers) {
      const double scale = std::sqrt(6.0 / layer.in);
      for (T& w : layer.weight) w = static_cast<T>(rng.Uniform(-scale, scale));
    }
  }
  return p;
}

template <typename T>
void Forward(const BasicParams<T>& params, const ScoringInput& input, ForwardTrace<T>& trace) {
  const WidirDims& d = params.dims;
  const std::size_t n = input.count;
  trace.count = n;
  trace.scores.assign(n, T(0));
  if (n == 0) return;
  const std::size_t dp = static_cast<std::size_t>(d.player);
  const std::size_t dc = static_cast<std::size_t>(d.contest);
  const std::size_t di = static_cast<std::size_t>(d.interaction);
  if (input.player.size() != dp && input.player.size() != dp * n) {
    std::string expected = std::to_string(dp);
    if (n > 1) expected += " or " + std::to_string(dp * n);
    throw DimensionError("PlayerBranch: expected " + expected + " input values, got " +
                         std::to_string(input.player.size()));
  }
  CheckSize("ContestBranch", input.contests.size(), dc * n);
  CheckSize("InteractionBranch", input.interactions.size(), di * n);
  const std::size_t pc = input.player.size() / dp;
  trace.player_columns = pc;

  ToFeatureMajor(input.player, dp, pc, trace.branch_inputs[0]);
  ToFeatureMajor(input.contests, dc, n, trace.branch_inputs[1]);
  ToFeatureMajor(input.interactions, di, n, trace.branch_inputs[2]);

  auto& out = trace.outputs;
  RunChain(params[Component::kPlayerBranch], trace.branch_inputs[0].data(), pc,
           out[Index(Component::kPlayerBranch)], true);
  RunChain(params[Component::kContestBranch], trace.branch_inputs[1].data(), n,
           out[Index(Component::kContestBranch)], true);
  RunChain(params[Component::kInteractionBranch], trace.branch_inputs[2].data(), n,
           out[Index(Component::kInteractionBranch)], true);

  trace.deep_input.resize(kDeepInput * n);
  const T* pb = out[Index(Component::kPlayerBranch)].back().data();
  const T* cb = out[Index(Component::kContestBranch)].back().data();
  const T* ib = out[Index(Component::kInteractionBranch)].back().data();
  for (std::size_t r = 0; r < kBranchWidth; ++r) {
    T* row = trace.deep_input.data() + r * n;
    if (pc == 1) {
      std::fill(row, row + n, pb[r]);
    } else {
      std::copy(pb + r * n, pb + (r + 1) * n, row);
    }
  }
  std::copy(cb, cb + kBranchWidth * n, trace.deep_input.data() + kBranchWidth * n);
  std::copy(ib, ib + kInteractionWidth * n, trace.deep_input.data() + 2 * kBranchWidth * n);

  RunChain(params[Component::kDeepBranch], trace.deep_input.data(), n,
           out[Index(Component::kDeepBranch)], true);
  RunChain(params[Component::kCombinedLayers], out[Index(Component::kDeepBranch)].back().data(), n,
           out[Index(Component::kCombinedLayers)], true);

  const std::size_t wide = dp + dc + di;
  trace.wide_input.resize(wide * n);
  for (std::size_t r = 0; r < dp; ++r) {
    T* row = trace.wide_input.data() + r * n;
    const T* src = trace.branch_inputs[0].data() + r * pc;
    if (pc == 1) {
      std::fill(row, row + n, src[0]);
    } else {
      std::copy(src, src + n, row);
    }
  }
  std::copy(trace.branch_inputs[1].begin(), trace.branch_inputs[1].end(),
            trace.wide_input.begin() + static_cast<std::ptrdiff_t>(dp * n));
  std::copy(trace.branch_inputs[2].begin(), trace.branch_inputs[2].end(),
            trace.wide_input.begin() + static_cast<std::ptrdiff_t>((dp + dc) * n));
  RunChain(params[Component::kWideBranch], trace.wide_input.data(), n,
           out[Index(Component::kWideBranch)], false);

  trace.final_input.resize((kCombinedOutput + 1) * n);
  const auto& combined = out[Index(Component::kCombinedLayers)].back();
  std::copy(combined.begin(), combined.end(), trace.final_input.begin());
  const auto& wide_out = out[Index(Component::kWideBranch)].back();
  std::copy(wide_out.begin(), wide_out.end(),
            trace.final_input.begin() + static_cast<std::ptrdiff_t>(kCombinedOutput * n));
  RunChain(params[Component::kFinalRanking], trace.final_input.data(), n,
           out[Index(Component::kFinalRanking)], false);
  trace.scores = out[Index(Component::kFinalRanking)].back();
}

template <typename T>
std::vector<T> ScoreBatch(const BasicParams<T>& params, const ScoringInput& input) {
  ForwardTrace<T> trace;
  Forward(params, input, trace);
  return std::move(trace.scores);
}

template <typename T>
T Forward(const BasicParams<T>& params, const FeatureTriple& triple) {
  ScoringInput input{triple.player, triple.contest, triple.interaction, 1};
  return ScoreBatch(params, input)[0];
}

template <typename T>
std::vector<T> ForwardBatch(const BasicParams<T>& params, std::span<const FeatureTriple> triples) {
  std::vector<float> player, contest, interaction;
  for (const FeatureTriple& t : triples) {
    player.insert(player.end(), t.player.begin(), t.player.end());
    contest.insert(contest.end(), t.contest.begin(), t.contest.end());
    interaction.insert(interaction.end(), t.interaction.begin(), t.interaction.end());
  }
  if (triples.size() == 1) return {Forward(params, triples[0])};
  ScoringInput input{player, contest, interaction, triples.size()};
  return ScoreBatch(params, input);
}

template <typename T>
void Backward(const BasicParams<T>& params, const ForwardTrace<T>& trace,
              std::span<const T> score_grad, BasicParams<T>& grad) {
  const std::size_t n = trace.count;
  if (score_grad.size() != n) throw DimensionError("score gradient length mismatch");
  if (n == 0) return;
  const auto& out = trace.outputs;
  std::vector<T> scratch;

  std::vector<T> d_final;
  BackChain(params[Component::kFinalRanking], trace.final_input.data(), n,
            out[Index(Component::kFinalRanking)], std::vector<T>(score_grad.begin(), score_grad.end()),
            grad[Component::kFinalRanking], &d_final, false, scratch);

  std::vector<T> d_combined(d_final.begin(), d_final.begin() + kCombinedOutput * n);
  std::vector<T> d_wide(d_final.begin() + kCombinedOutput * n, d_final.end());
  BackChain(params[Component::kWideBranch], trace.wide_input.data(), n,
            out[Index(Component::kWideBranch)], std::move(d_wide), grad[Component::kWideBranch],
            nullptr, false, scratch);

  std::vector<T> d_deep_out;
  BackChain(params[Component::kCombinedLayers], out[Index(Component::kDeepBranch)].back().data(), n,
            out[Index(Component::kCombinedLayers)], std::move(d_combined),
            grad[Component::kCombinedLayers], &d_deep_out, true, scratch);
  std::vector<T> d_deep_in;
  BackChain(params[Component::kDeepBranch], trace.deep_input.data(), n,
            out[Index(Component::kDeepBranch)], std::move(d_deep_out), grad[Component::kDeepBranch],
            &d_deep_in, true, scratch);

  const std::size_t pc = trace.player_columns;
  std::vector<T> d_pb(kBranchWidth * pc, T(0));
  for (std::size_t r = 0; r < kBranchWidth; ++r) {
    const T* src = d_deep_in.data() + r * n;
    if (pc == 1) {
      T s = T(0);
      for (std::size_t j = 0; j < n; ++j) s += src[j];
      d_pb[r] = s;
    } else {
      std::copy(src, src + n, d_pb.begin() + static_cast<std::ptrdiff_t>(r * n));
    }
  }
  std::vector<T> d_cb(d_deep_in.begin() + kBranchWidth * n, d_deep_in.begin() + 2 * kBranchWidth * n);
  std::vector<T> d_ib(d_deep_in.begin() + 2 * kBranchWidth * n, d_deep_in.end());
  BackChain(params[Component::kPlayerBranch], trace.branch_inputs[0].data(), pc,
            out[Index(Component::kPlayerBranch)], std::move(d_pb), grad[Component::kPlayerBranch],
            nullptr, true, scratch);
  BackChain(params[Component::kContestBranch], trace.branch_inputs[1].data(), n,
            out[Index(Component::kContestBranch)], std::move(d_cb), grad[Component::kContestBranch],
            nullptr, true, scratch);
  BackChain(params[Component::kInteractionBranch], trace.branch_inputs[2].data(), n,
            out[Index(Component::kInteractionBranch)], std::move(d_ib),
            grad[Component::kInteractionBranch], nullptr, true, scratch);
}

template <typename T>
T PairGradient(const BasicParams<T>& params, const TriplePair& pair, BasicParams<T>& grad) {
  return PairGradientBatch(params, std::span<const TriplePair>(&pair, 1), grad);
}

template <typename T>
T PairGradientBatch(const BasicParams<T>& params, std::span<const TriplePair> pairs,
                    BasicParams<T>& grad) {
  if (pairs.empty()) return T(0);
  std::vector<float> player, contest, interaction;
  for (const TriplePair& p : pairs) {
    for (const FeatureTriple* t : {&p.pos, &p.neg}) {
      player.insert(player.end(), t->player.begin(), t->player.end());
      contest.insert(contest.end(), t->contest.begin(), t->contest.end());
      interaction.insert(interaction.end(), t->interaction.begin(), t->interaction.end());
    }
  }
  ForwardTrace<T> trace;
  Forward(params, ScoringInput{player, contest, interaction, 2 * pairs.size()}, trace);
  std::vector<T> score_grad(2 * pairs.size(), T(0));
  T loss = T(0);
  bool any = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const T l = HingeLoss(trace.scores[2 * i], trace.scores[2 * i + 1]);
    if (l > T(0)) {
      loss += l;
      score_grad[2 * i] = T(-1);
      score_grad[2 * i + 1] = T(1);
      any = true;
    }
  }
  if (any) Backward(params, trace, std::span<const T>(score_grad), grad);
  return loss;
}

std::string SerializeParams(const WidirParams& params) {
  std::string out(kMagic, sizeof kMagic);
  PutU32(out, kModelFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(params.dims.player));
  PutU32(out, static_cast<std::uint32_t>(params.dims.contest));
  PutU32(out, static_cast<std::uint32_t>(params.dims.interaction));
  for (const auto& layers : params.components) {
    PutU32(out, static_cast<std::uint32_t>(layers.size()));
    for (const auto& layer : layers) {
      PutU32(out, static_cast<std::uint32_t>(layer.in));
      PutU32(out, static_cast<std::uint32_t>(layer.out));
      for (float w : layer.weight) PutF32(out, w);
      for (float b : layer.bias) PutF32(out, b);
    }
  }
  return out;
}

WidirParams DeserializeParams(std::string_view bytes) {
  using Kind = ModelFormatError::Kind;
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ModelFormatError(Kind::kCorrupt, "not a model stream (bad magic)");
  }
  r.Take(sizeof kMagic);
  const std::uint32_t version = r.U32();
  if (version != kModelFormatVersion) {
    throw ModelFormatError(Kind::kVersionMismatch,
                           "model format version " + std::to_string(version) + ", expected " +
                               std::to_string(kModelFormatVersion));
  }
  WidirDims dims;
  dims.player = static_cast<int>(r.U32());
  dims.contest = static_cast<int>(r.U32());
  dims.interaction = static_cast<int>(r.U32());
  if (dims.player <= 0 || dims.contest <= 0 || dims.interaction <= 0 || dims.player > 1 << 20 ||
      dims.contest > 1 << 20 || dims.interaction > 1 << 20) {
    throw ModelFormatError(Kind::kCorrupt, "implausible feature dimensions");
  }
  const auto arch = Architecture(dims);
  const ParamCounts expected = ParamCount(dims);
  WidirParams p;
  p.dims = dims;
  for (std::size_t c = 0; c < kNumComponents; ++c) {
    const std::string name(ComponentName(kAllComponents[c]));
    const std::uint32_t layers = r.U32();
    if (layers != arch[c].size()) {
      throw ModelFormatError(Kind::kCountMismatch, name + ": " + std::to_string(layers) +
                                                       " layers, architecture has " +
                                                       std::to_string(arch[c].size()));
    }
    long long count = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      DenseLayer<float> layer;
      layer.in = static_cast<int>(r.U32());
      layer.out = static_cast<int>(r.U32());
      if (layer.in != arch[c][l].in || layer.out != arch[c][l].out) {
        const long long declared = static_cast<long long>(layer.in) * layer.out + layer.out;
        throw ModelFormatError(
            Kind::kCountMismatch,
            name + " layer " + std::to_string(l) + " shape " + std::to_string(layer.in) + "x" +
                std::to_string(layer.out) + " gives a parameter count that disagrees with " +
                std::to_string(expected.per_component[c]) + " (declared layer size " +
                std::to_string(declared) + ")");
      }
      const std::size_t nw = static_cast<std::size_t>(layer.in) * layer.out;
      r.Need(4 * (nw + layer.out));
      layer.weight.resize(nw);
      for (float& w : layer.weight) w = r.F32();
      layer.bias.resize(static_cast<std::size_t>(layer.out));
      for (float& b : layer.bias) b = r.F32();
      count += static_cast<long long>(layer.size());
      p.components[c].push_back(std::move(layer));
    }
    if (count != expected.per_component[c]) {
      throw ModelFormatError(Kind::kCountMismatch, name + ": " + std::to_string(count) +
                                                       " parameters, expected " +
                                                       std::to_string(expected.per_component[c]));
    }
  }
  if (r.remaining() != 0) {
    throw ModelFormatError(Kind::kCorrupt, "trailing bytes after model parameters");
  }
  if (static_cast<long long>(p.Count()) != expected.total) {
    throw ModelFormatError(Kind::kCountMismatch, "total parameter count mismatch");
  }
  return p;
}

void SaveParams(const std::filesystem::path& path, const WidirParams& params) {
  WriteFileAtomic(path, SerializeParams(params));
}

WidirParams LoadParams(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  try {
    return DeserializeParams(bytes);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

#define WIDIR_INSTANTIATE(T)                                                                   \
  template struct BasicParams<T>;                                                              \
  template BasicParams<T> ZeroParams<T>(const WidirDims&);                                     \
  template BasicParams<T> InitParams<T>(const WidirDims&, std::uint64_t);                      \
  template void Forward<T>(const BasicParams<T>&, const ScoringInput&, ForwardTrace<T>&);      \
  template std::vector<T> ScoreBatch<T>(const BasicParams<T>&, const ScoringInput&);           \
  template T Forward<T>(const BasicParams<T>&, const FeatureTriple&);                          \
  template std::vector<T> ForwardBatch<T>(const BasicParams<T>&,                               \
                                          std::span<const FeatureTriple>);                     \
  template void Backward<T>(const BasicParams<T>&, const ForwardTrace<T>&, std::span<const T>, \
                            BasicParams<T>&);                                                  \
  template T PairGradient<T>(const BasicParams<T>&, const TriplePair&, BasicParams<T>&);       \
  template T PairGradientBatch<T>(const BasicParams<T>&, std::span<const TriplePair>,          \
                                  BasicParams<T>&);

WIDIR_INSTANTIATE(float)
WIDIR_INSTANTIATE(double)
#undef WIDIR_INSTANTIATE

template BasicParams<double> BasicParams<float>::Cast<double>() const;
template BasicParams<float> BasicParams<double>::Cast<float>() const;
template BasicParams<float> BasicParams<float>::Cast<float>() const;
template BasicParams<double> BasicParams<double>::Cast<double>() const;

}  // namespace widir
