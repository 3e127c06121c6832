#pragma once

#include "gpae/tensor.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpae {

enum class Activation { none, relu, hardswish };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view text);

// Width rounding used by all scaled layers: nearest multiple of 8, at least
// 8, never more than 10% below the requested width.
int round_channels(double width);

struct InConvSpec {
    int out_channels = 16;
    int kernel = 3;
    int stride = 2;
    Activation activation = Activation::hardswish;

    friend bool operator==(const InConvSpec&, const InConvSpec&) = default;
};

// One mobile inverted bottleneck block with scaled (concrete) widths.
struct BlockSpec {
    int index = 0;
    int kernel = 3;
    int in_channels = 0;
    int expansion_channels = 0;
    int out_channels = 0;
    std::optional<int> se_bottleneck;
    int stride = 1;
    Activation activation = Activation::relu;

    // No expansion conv when the block does not widen its input.
    bool has_expand() const { return expansion_channels != in_channels; }
    bool has_se() const { return se_bottleneck.has_value(); }
    bool has_residual() const { return stride == 1 && in_channels == out_channels; }

    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct HeadSpec {
    int clf1_channels = 960;
    int clf2_features = 1280;
    int clf3_classes = 527;

    friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

struct ArchSpec {
    double alpha = 1.0;
    int in_channels = 1;
    int input_bins = 128;
    std::optional<InConvSpec> in_conv;
    std::vector<BlockSpec> blocks;
    std::optional<HeadSpec> head;

    const BlockSpec* block(int index) const;
    int output_channels() const;

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Width-scaled MobileNetV3 with 15 blocks and the 527-class head.
ArchSpec build_arch(double alpha);

// Checks internal consistency (channel chaining, kernel/stride ranges).
// Throws invalid_config.
void validate_arch(const ArchSpec& spec);

// Conv output length with symmetric kernel/2 padding.
std::size_t conv_out_size(std::size_t in, int kernel, int stride);

// Names and shapes of every tensor a TensorMap for `spec` must hold. Conv
// layers carry weight, bn_scale and bn_shift; linear and SE layers carry
// weight and bias.
std::map<std::string, Shape> weight_layout(const ArchSpec& spec);

std::string block_prefix(int index);

}  // namespace gpae
