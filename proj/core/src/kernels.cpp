#include "gpae/kernels.hpp"

#include "gpae/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gpae {

namespace {

// Output columns ox for which ox*stride + offset lands inside [0, width).
struct ColumnRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

ColumnRange valid_columns(std::ptrdiff_t offset, std::size_t width, std::size_t out_width,
                          int stride) {
    const auto s = static_cast<std::ptrdiff_t>(stride);
    std::ptrdiff_t lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
    std::ptrdiff_t hi = (static_cast<std::ptrdiff_t>(width) - 1 - offset);
    hi = hi < 0 ? -1 : hi / s;
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(out_width) - 1);
    if (hi < lo) return {};
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi) + 1};
}

// Accumulates one k x k filter over one input plane into one output plane.
void accumulate_plane(const float* in, std::size_t h, std::size_t w, const float* filter,
                      int kernel, int stride, float* out, std::size_t oh, std::size_t ow) {
    const int pad = kernel / 2;
    for (std::size_t oy = 0; oy < oh; ++oy) {
        float* out_row = out + oy * ow;
        for (int ky = 0; ky < kernel; ++ky) {
            const auto iy = static_cast<std::ptrdiff_t>(oy) * stride + ky - pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            const float* in_row = in + static_cast<std::size_t>(iy) * w;
            for (int kx = 0; kx < kernel; ++kx) {
                const float wv = filter[ky * kernel + kx];
                const std::ptrdiff_t offset = kx - pad;
                const auto cols = valid_columns(offset, w, ow, stride);
                if (stride == 1) {
                    const float* src = in_row + offset;
                    for (std::size_t ox = cols.begin; ox < cols.end; ++ox) out_row[ox] += wv * src[ox];
                } else {
                    for (std::size_t ox = cols.begin; ox < cols.end; ++ox)
                        out_row[ox] += wv * in_row[static_cast<std::ptrdiff_t>(ox) * stride + offset];
                }
            }
        }
    }
}

}  // namespace

std::string_view to_string(SeGate gate) {
    return gate == SeGate::sigmoid ? "sigmoid" : "hard_sigmoid";
}

SeGate parse_se_gate(std::string_view text) {
    if (text == "hard_sigmoid") return SeGate::hard_sigmoid;
    if (text == "sigmoid") return SeGate::sigmoid;
    throw Error(ErrorKind::invalid_config, "unknown SE gate '" + std::string(text) + "'");
}

void apply_activation(std::span<float> x, Activation act) {
    switch (act) {
        case Activation::none: return;
        case Activation::relu:
            for (float& v : x) v = relu(v);
            return;
        case Activation::hardswish:
            for (float& v : x) v = hard_swish(v);
            return;
    }
}

FeatureMap conv2d(const FeatureMap& in, std::span<const float> weight, std::span<const float> bias,
                  int out_channels, int kernel, int stride, int groups) {
    const auto oc = static_cast<std::size_t>(out_channels);
    const auto g = static_cast<std::size_t>(groups);
    const std::size_t in_per_group = in.channels / g;
    const std::size_t out_per_group = oc / g;
    const std::size_t oh = conv_out_size(in.height, kernel, stride);
    const std::size_t ow = conv_out_size(in.width, kernel, stride);
    const auto kk = static_cast<std::size_t>(kernel * kernel);

    FeatureMap out(oc, oh, ow);
    for (std::size_t o = 0; o < oc; ++o) {
        auto plane = out.channel(o);
        std::fill(plane.begin(), plane.end(), bias.empty() ? 0.0f : bias[o]);
        const std::size_t group = o / out_per_group;
        for (std::size_t i = 0; i < in_per_group; ++i) {
            const std::size_t ic = group * in_per_group + i;
            const float* filter = weight.data() + (o * in_per_group + i) * kk;
            accumulate_plane(in.channel(ic).data(), in.height, in.width, filter, kernel, stride,
                             plane.data(), oh, ow);
        }
    }
    return out;
}

FeatureMap depthwise_conv2d(const FeatureMap& in, std::span<const float> weight,
                            std::span<const float> bias, int kernel, int stride) {
    const std::size_t oh = conv_out_size(in.height, kernel, stride);
    const std::size_t ow = conv_out_size(in.width, kernel, stride);
    const auto kk = static_cast<std::size_t>(kernel * kernel);
    FeatureMap out(in.channels, oh, ow);
    for (std::size_t c = 0; c < in.channels; ++c) {
        auto plane = out.channel(c);
        std::fill(plane.begin(), plane.end(), bias.empty() ? 0.0f : bias[c]);
        accumulate_plane(in.channel(c).data(), in.height, in.width, weight.data() + c * kk, kernel,
                         stride, plane.data(), oh, ow);
    }
    return out;
}

FeatureMap pointwise_conv(const FeatureMap& in, std::span<const float> weight,
                          std::span<const float> bias, int out_channels) {
    const auto oc = static_cast<std::size_t>(out_channels);
    const std::size_t ic = in.channels;
    const std::size_t n = in.plane();
    FeatureMap out(oc, in.height, in.width);
    // Four output channels per pass so each input row is streamed once per
    // group of outputs.
    std::size_t o = 0;
    for (; o + 4 <= oc; o += 4) {
        float* r0 = out.channel(o).data();
        float* r1 = out.channel(o + 1).data();
        float* r2 = out.channel(o + 2).data();
        float* r3 = out.channel(o + 3).data();
        std::fill(r0, r0 + n, bias.empty() ? 0.0f : bias[o]);
        std::fill(r1, r1 + n, bias.empty() ? 0.0f : bias[o + 1]);
        std::fill(r2, r2 + n, bias.empty() ? 0.0f : bias[o + 2]);
        std::fill(r3, r3 + n, bias.empty() ? 0.0f : bias[o + 3]);
        for (std::size_t i = 0; i < ic; ++i) {
            const float* src = in.channel(i).data();
            const float w0 = weight[o * ic + i];
            const float w1 = weight[(o + 1) * ic + i];
            const float w2 = weight[(o + 2) * ic + i];
            const float w3 = weight[(o + 3) * ic + i];
            for (std::size_t p = 0; p < n; ++p) {
                const float v = src[p];
                r0[p] += w0 * v;
                r1[p] += w1 * v;
                r2[p] += w2 * v;
                r3[p] += w3 * v;
            }
        }
    }
    for (; o < oc; ++o) {
        float* r = out.channel(o).data();
        std::fill(r, r + n, bias.empty() ? 0.0f : bias[o]);
        for (std::size_t i = 0; i < ic; ++i) {
            const float* src = in.channel(i).data();
            const float w = weight[o * ic + i];
            for (std::size_t p = 0; p < n; ++p) r[p] += w * src[p];
        }
    }
    return out;
}

std::vector<float> linear(std::span<const float> x, std::span<const float> weight,
                          std::span<const float> bias, int out_features) {
    const auto n_out = static_cast<std::size_t>(out_features);
    const std::size_t n_in = x.size();
    std::vector<float> y(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
        const float* row = weight.data() + o * n_in;
        float acc = 0.0f;
        for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * x[i];
        y[o] = acc + (bias.empty() ? 0.0f : bias[o]);
    }
    return y;
}

std::vector<float> global_avg_pool(const FeatureMap& x) {
    std::vector<float> out(x.channels);
    const double inv = 1.0 / static_cast<double>(x.plane());
    for (std::size_t c = 0; c < x.channels; ++c) {
        double acc = 0.0;
        for (float v : x.channel(c)) acc += v;
        out[c] = static_cast<float>(acc * inv);
    }
    return out;
}

void scale_channels(FeatureMap& x, std::span<const float> gate) {
    for (std::size_t c = 0; c < x.channels; ++c) {
        const float g = gate[c];
        for (float& v : x.channel(c)) v *= g;
    }
}

std::vector<float> squeeze_excite(FeatureMap& x, std::span<const float> fc1_w,
                                  std::span<const float> fc1_b, std::span<const float> fc2_w,
                                  std::span<const float> fc2_b, int bottleneck, SeGate gate) {
    const auto pooled = global_avg_pool(x);
    auto hidden = linear(pooled, fc1_w, fc1_b, bottleneck);
    apply_activation(hidden, Activation::relu);
    auto scale = linear(hidden, fc2_w, fc2_b, static_cast<int>(x.channels));
    for (float& v : scale)
        v = gate == SeGate::sigmoid ? 1.0f / (1.0f + std::exp(-v)) : hard_sigmoid(v);
    scale_channels(x, scale);
    return hidden;
}

}  // namespace gpae
