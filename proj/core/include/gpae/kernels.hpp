#pragma once

// Inference kernels over CHW feature maps. All convolutions use symmetric
// kernel/2 zero padding. Weights are laid out as in PyTorch:
// conv [out, in/groups, k, k], linear [out, in].

#include "gpae/arch.hpp"
#include "gpae/tensor.hpp"

#include <span>
#include <vector>

namespace gpae {

enum class SeGate { hard_sigmoid, sigmoid };

std::string_view to_string(SeGate gate);
SeGate parse_se_gate(std::string_view text);

inline float relu(float x) { return x > 0.0f ? x : 0.0f; }
inline float relu6(float x) { return x < 0.0f ? 0.0f : (x > 6.0f ? 6.0f : x); }
inline float hard_sigmoid(float x) { return relu6(x + 3.0f) / 6.0f; }
inline float hard_swish(float x) { return x * relu6(x + 3.0f) / 6.0f; }

void apply_activation(std::span<float> x, Activation act);

// Dense or grouped convolution. in.channels and out_channels must both be
// divisible by groups.
FeatureMap conv2d(const FeatureMap& in, std::span<const float> weight, std::span<const float> bias,
                  int out_channels, int kernel, int stride, int groups = 1);

FeatureMap depthwise_conv2d(const FeatureMap& in, std::span<const float> weight,
                            std::span<const float> bias, int kernel, int stride);

// 1x1 convolution, weight [out, in].
FeatureMap pointwise_conv(const FeatureMap& in, std::span<const float> weight,
                          std::span<const float> bias, int out_channels);

std::vector<float> linear(std::span<const float> x, std::span<const float> weight,
                          std::span<const float> bias, int out_features);

std::vector<float> global_avg_pool(const FeatureMap& x);

// Squeeze-and-excitation applied in place. Returns the bottleneck vector
// (after the first FC layer and its ReLU).
std::vector<float> squeeze_excite(FeatureMap& x, std::span<const float> fc1_w,
                                  std::span<const float> fc1_b, std::span<const float> fc2_w,
                                  std::span<const float> fc2_b, int bottleneck, SeGate gate);

// Multiplies channel c of x by gate[c].
void scale_channels(FeatureMap& x, std::span<const float> gate);

}  // namespace gpae
