#include "gpae/arch.hpp"

#include "gpae/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gpae {

namespace {

struct BaseBlock {
    int kernel;
    int expansion;
    int out;
    int se;  // 0 = no SE
    int stride;
    Activation act;
};

// MobileNetV3-Large block table at width 1.0.
constexpr std::array<BaseBlock, 15> kBaseBlocks{{
    {3, 16, 16, 0, 1, Activation::relu},
    {3, 64, 24, 0, 2, Activation::relu},
    {3, 72, 24, 0, 1, Activation::relu},
    {5, 72, 40, 24, 2, Activation::relu},
    {5, 120, 40, 32, 1, Activation::relu},
    {5, 120, 40, 32, 1, Activation::relu},
    {3, 240, 80, 0, 2, Activation::hardswish},
    {3, 200, 80, 0, 1, Activation::hardswish},
    {3, 184, 80, 0, 1, Activation::hardswish},
    {3, 184, 80, 0, 1, Activation::hardswish},
    {3, 480, 112, 120, 1, Activation::hardswish},
    {3, 672, 112, 168, 1, Activation::hardswish},
    {5, 672, 160, 168, 2, Activation::hardswish},
    {5, 960, 160, 240, 1, Activation::hardswish},
    {5, 960, 160, 240, 1, Activation::hardswish},
}};

constexpr int kMaxChannels = 1 << 16;

void add_conv(std::map<std::string, Shape>& out, const std::string& prefix, int out_ch,
              int in_per_group, int kernel) {
    const auto o = static_cast<std::size_t>(out_ch);
    out[prefix + ".weight"] = {o, static_cast<std::size_t>(in_per_group),
                               static_cast<std::size_t>(kernel), static_cast<std::size_t>(kernel)};
    out[prefix + ".bn_scale"] = {o};
    out[prefix + ".bn_shift"] = {o};
}

void add_linear(std::map<std::string, Shape>& out, const std::string& prefix, int out_f, int in_f) {
    out[prefix + ".weight"] = {static_cast<std::size_t>(out_f), static_cast<std::size_t>(in_f)};
    out[prefix + ".bias"] = {static_cast<std::size_t>(out_f)};
}

}  // namespace

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::hardswish: return "hardswish";
    }
    return "none";
}

Activation parse_activation(std::string_view text) {
    if (text == "none") return Activation::none;
    if (text == "relu") return Activation::relu;
    if (text == "hardswish") return Activation::hardswish;
    throw Error(ErrorKind::invalid_config, "unknown activation '" + std::string(text) + "'");
}

int round_channels(double width) {
    constexpr int divisor = 8;
    const auto floored = static_cast<long long>(std::floor(width + divisor / 2.0));
    long long rounded = std::max<long long>(divisor, floored - floored % divisor);
    if (static_cast<double>(rounded) < 0.9 * width) rounded += divisor;
    return static_cast<int>(rounded);
}

const BlockSpec* ArchSpec::block(int index) const {
    for (const auto& b : blocks)
        if (b.index == index) return &b;
    return nullptr;
}

int ArchSpec::output_channels() const {
    if (!blocks.empty()) return blocks.back().out_channels;
    if (in_conv) return in_conv->out_channels;
    return in_channels;
}

ArchSpec build_arch(double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 8.0))
        throw Error(ErrorKind::invalid_config,
                    "width multiplier must lie in (0, 8], got " + std::to_string(alpha));
    ArchSpec spec;
    spec.alpha = alpha;
    spec.in_conv = InConvSpec{round_channels(16 * alpha), 3, 2, Activation::hardswish};

    int in_ch = spec.in_conv->out_channels;
    for (std::size_t i = 0; i < kBaseBlocks.size(); ++i) {
        const auto& base = kBaseBlocks[i];
        BlockSpec b;
        b.index = static_cast<int>(i) + 1;
        b.kernel = base.kernel;
        b.in_channels = in_ch;
        b.expansion_channels = round_channels(base.expansion * alpha);
        b.out_channels = round_channels(base.out * alpha);
        if (base.se) b.se_bottleneck = round_channels(base.se * alpha);
        b.stride = base.stride;
        b.activation = base.act;
        spec.blocks.push_back(b);
        in_ch = b.out_channels;
    }
    spec.head = HeadSpec{round_channels(960 * alpha), round_channels(1280 * alpha), 527};
    return spec;
}

void validate_arch(const ArchSpec& spec) {
    auto fail = [](const std::string& what) {
        throw Error(ErrorKind::invalid_config, "architecture: " + what);
    };
    auto check_width = [&](int c, const std::string& what) {
        if (c <= 0 || c > kMaxChannels) fail(what + " must lie in [1, 65536]");
    };
    auto check_kernel = [&](int k, int s, const std::string& what) {
        if (k <= 0 || k > 15 || k % 2 == 0) fail(what + " kernel must be odd and at most 15");
        if (s <= 0 || s > 4) fail(what + " stride must lie in [1, 4]");
    };
    check_width(spec.in_channels, "in_channels");
    if (spec.input_bins <= 0 || spec.input_bins > 4096) fail("input_bins must lie in [1, 4096]");
    int ch = spec.in_channels;
    if (spec.in_conv) {
        check_width(spec.in_conv->out_channels, "in_conv out_channels");
        check_kernel(spec.in_conv->kernel, spec.in_conv->stride, "in_conv");
        ch = spec.in_conv->out_channels;
    }
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        const auto& b = spec.blocks[i];
        const std::string name = "block " + std::to_string(b.index);
        if (b.index <= 0) fail(name + ": index must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (spec.blocks[j].index == b.index) fail(name + ": duplicate index");
        if (b.in_channels != ch)
            fail(name + ": in_channels " + std::to_string(b.in_channels) +
                 " does not match preceding output " + std::to_string(ch));
        check_width(b.expansion_channels, name + " expansion");
        check_width(b.out_channels, name + " out_channels");
        if (b.se_bottleneck) check_width(*b.se_bottleneck, name + " SE bottleneck");
        check_kernel(b.kernel, b.stride, name);
        ch = b.out_channels;
    }
    if (spec.head) {
        check_width(spec.head->clf1_channels, "clf1 channels");
        check_width(spec.head->clf2_features, "clf2 features");
        check_width(spec.head->clf3_classes, "clf3 classes");
    }
}

std::size_t conv_out_size(std::size_t in, int kernel, int stride) {
    const auto pad = static_cast<std::size_t>(kernel / 2);
    return (in + 2 * pad - static_cast<std::size_t>(kernel)) / static_cast<std::size_t>(stride) + 1;
}

std::string block_prefix(int index) { return "b" + std::to_string(index); }

std::map<std::string, Shape> weight_layout(const ArchSpec& spec) {
    std::map<std::string, Shape> out;
    int ch = spec.in_channels;
    if (spec.in_conv) {
        add_conv(out, "in_conv", spec.in_conv->out_channels, ch, spec.in_conv->kernel);
        ch = spec.in_conv->out_channels;
    }
    for (const auto& b : spec.blocks) {
        const std::string p = block_prefix(b.index);
        if (b.has_expand()) add_conv(out, p + ".expand", b.expansion_channels, b.in_channels, 1);
        add_conv(out, p + ".depthwise", b.expansion_channels, 1, b.kernel);
        if (b.has_se()) {
            add_linear(out, p + ".se.fc1", *b.se_bottleneck, b.expansion_channels);
            add_linear(out, p + ".se.fc2", b.expansion_channels, *b.se_bottleneck);
        }
        add_conv(out, p + ".project", b.out_channels, b.expansion_channels, 1);
        ch = b.out_channels;
    }
    if (spec.head) {
        add_conv(out, "head.clf1", spec.head->clf1_channels, ch, 1);
        add_linear(out, "head.clf2", spec.head->clf2_features, spec.head->clf1_channels);
        add_linear(out, "head.clf3", spec.head->clf3_classes, spec.head->clf2_features);
    }
    return out;
}

}  // namespace gpae
