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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "widir/error.hpp"
#include "widir/features.hpp"

namespace widir {

struct WidirDims {
  int player = kPlayerFeatureDims;
  int contest = kContestFeatureDims;
  int interaction = kInteractionFeatureDims;

  bool operator==(const WidirDims&) const = default;
};

enum class Component : std::uint8_t {
  kPlayerBranch = 0,
  kContestBranch,
  kInteractionBranch,
  kWideBranch,
  kDeepBranch,
  kCombinedLayers,
  kFinalRanking,
};
inline constexpr std::size_t kNumComponents = 7;
inline constexpr std::array<Component, kNumComponents> kAllComponents = {
    Component::kPlayerBranch,  Component::kContestBranch,   Component::kInteractionBranch,
    Component::kWideBranch,    Component::kDeepBranch,      Component::kCombinedLayers,
    Component::kFinalRanking};

std::string_view ComponentName(Component component);

struct LayerShape {
  int in = 0;
  int out = 0;
};

// Layer flow of every component for the given input dims.
std::array<std::vector<LayerShape>, kNumComponents> Architecture(const WidirDims& dims);

struct ParamCounts {
  std::array<long long, kNumComponents> per_component{};
  long long total = 0;
};

// Closed-form counts: 64dp+4224, 64dc+4224, 16di+560, dp+dc+di+1, 68096,
// 14796, 29; total 65dp+65dc+17di+91930.
ParamCounts ParamCount(const WidirDims& dims);

template <typename T>
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<T> weight;  // out x in, row-major
  std::vector<T> bias;    // out

  std::size_t size() const { return weight.size() + bias.size(); }
  bool operator==(const DenseLayer&) const = default;
};

template <typename T>
struct BasicParams {
  WidirDims dims;
  std::array<std::vector<DenseLayer<T>>, kNumComponents> components;

  std::vector<DenseLayer<T>>& operator[](Component c) {
    return components[static_cast<std::size_t>(c)];
  }
  const std::vector<DenseLayer<T>>& operator[](Component c) const {
    return components[static_cast<std::size_t>(c)];
  }

  std::size_t ComponentCount(Component c) const;
  std::size_t Count() const;
  void SetZero();

  // Visits every scalar in serialization order (component, layer, weights, bias).
  template <typename F>
  void ForEach(F&& fn) {
    for (auto& layers : components)
      for (auto& layer : layers) {
        for (auto& w : layer.weight) fn(w);
        for (auto& b : layer.bias) fn(b);
      }
  }
  template <typename F>
  void ForEach(F&& fn) const {
    for (const auto& layers : components)
      for (const auto& layer : layers) {
        for (const auto& w : layer.weight) fn(w);
        for (const auto& b : layer.bias) fn(b);
      }
  }

  template <typename U>
  BasicParams<U> Cast() const;

  bool operator==(const BasicParams&) const = default;
};

using WidirParams = BasicParams<float>;
// 64-bit variant used for gradient checking.
using WidirParams64 = BasicParams<double>;

// Zero-filled parameters with the architecture's shapes.
template <typename T>
BasicParams<T> ZeroParams(const WidirDims& dims);

// Weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), biases zero.
template <typename T>
BasicParams<T> InitParams(const WidirDims& dims, std::uint64_t seed);

// Candidate inputs in item-major layout. `player` holds either one row shared
// by every item or one row per item.
struct ScoringInput {
  std::span<const float> player;
  std::span<const float> contests;
  std::span<const float> interactions;
  std::size_t count = 0;
};

// Activations retained for the backward pass.
template <typename T>
struct ForwardTrace {
  std::size_t count = 0;
  std::size_t player_columns = 0;
  std::array<std::vector<T>, 3> branch_inputs;  // feature-major: in x columns
  std::vector<T> wide_input;
  std::vector<T> deep_input;
  std::vector<T> final_input;
  std::array<std::vector<std::vector<T>>, kNumComponents> outputs;
  std::vector<T> scores;
};

// Scores `input.count` candidates. Every score is computed with the same
// arithmetic as a single-item call, so batching never changes a value.
template <typename T>
void Forward(const BasicParams<T>& params, const ScoringInput& input, ForwardTrace<T>& trace);

template <typename T>
std::vector<T> ScoreBatch(const BasicParams<T>& params, const ScoringInput& input);

template <typename T>
T Forward(const BasicParams<T>& params, const FeatureTriple& triple);

template <typename T>
std::vector<T> ForwardBatch(const BasicParams<T>& params, std::span<const FeatureTriple> triples);

// Accumulates d(sum_i score_grad[i] * score_i)/d(params) into `grad`.
template <typename T>
void Backward(const BasicParams<T>& params, const ForwardTrace<T>& trace,
              std::span<const T> score_grad, BasicParams<T>& grad);

// max(0, 1 - pos + neg)
template <typename T>
constexpr T HingeLoss(T pos, T neg) {
  const T margin = T(1) - pos + neg;
  return margin > T(0) ? margin : T(0);
}

struct TriplePair {
  FeatureTriple pos;
  FeatureTriple neg;
};

// Gradient of HingeLoss(Forward(pos), Forward(neg)); zero when inactive
// (including exactly at the kink). Returns the loss.
template <typename T>
T PairGradient(const BasicParams<T>& params, const TriplePair& pair, BasicParams<T>& grad);

// Summed over pairs. Returns the summed loss.
template <typename T>
T PairGradientBatch(const BasicParams<T>& params, std::span<const TriplePair> pairs,
                    BasicParams<T>& grad);

inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public DataError {
 public:
  enum class Kind { kCorrupt, kCountMismatch, kVersionMismatch };
  ModelFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Little-endian: "WIDIRMDL", u32 version, u32 dims x3, then per component a
// u32 layer count and per layer u32 in, u32 out, f32 weights, f32 biases.
std::string SerializeParams(const WidirParams& params);
WidirParams DeserializeParams(std::string_view bytes);

void SaveParams(const std::filesystem::path& path, const WidirParams& params);
WidirParams LoadParams(const std::filesystem::path& path);

}  // namespace widir
