#include "gpae/complexity.hpp"

#include "gpae/error.hpp"
#include "gpae/net.hpp"

#include <cmath>
#include <vector>

namespace gpae {

namespace {

using u64 = std::uint64_t;

struct Dims {
    u64 h;
    u64 w;
};

Dims conv_dims(Dims in, int kernel, int stride) {
    return {conv_out_size(in.h, kernel, stride), conv_out_size(in.w, kernel, stride)};
}

u64 conv_params(u64 in_per_group, u64 out, u64 kernel) { return out * in_per_group * kernel * kernel + 2 * out; }
u64 linear_params(u64 in, u64 out) { return in * out + out; }

// Naive CHW tensor used by the instrumented executor.
struct Map {
    u64 c, h, w;
    std::vector<float> v;
    float& at(u64 ci, u64 y, u64 x) { return v[(ci * h + y) * w + x]; }
};

class CountingExecutor {
public:
    explicit CountingExecutor(const TensorMap& weights) : weights_(weights) {}

    u64 macs() const { return macs_; }

    // Dense/grouped conv followed by BN scale/shift.
    Map conv_bn(const Map& in, const std::string& prefix, u64 out_ch, int kernel, int stride,
                u64 groups) {
        const auto& wt = weights_.at(prefix + ".weight").data;
        const auto& scale = weights_.at(prefix + ".bn_scale").data;
        const auto& shift = weights_.at(prefix + ".bn_shift").data;
        const u64 k = static_cast<u64>(kernel);
        const u64 pad = k / 2;
        Map padded{in.c, in.h + 2 * pad, in.w + 2 * pad, {}};
        padded.v.assign(padded.c * padded.h * padded.w, 0.0f);
        for (u64 c = 0; c < in.c; ++c)
            for (u64 y = 0; y < in.h; ++y)
                for (u64 x = 0; x < in.w; ++x)
                    padded.at(c, y + pad, x + pad) = in.v[(c * in.h + y) * in.w + x];

        const u64 oh = (padded.h - k) / static_cast<u64>(stride) + 1;
        const u64 ow = (padded.w - k) / static_cast<u64>(stride) + 1;
        const u64 in_pg = in.c / groups;
        const u64 out_pg = out_ch / groups;
        Map out{out_ch, oh, ow, std::vector<float>(out_ch * oh * ow)};
        for (u64 o = 0; o < out_ch; ++o) {
            const u64 g = o / out_pg;
            for (u64 y = 0; y < oh; ++y) {
                for (u64 x = 0; x < ow; ++x) {
                    double acc = 0.0;
                    for (u64 i = 0; i < in_pg; ++i)
                        for (u64 ky = 0; ky < k; ++ky)
                            for (u64 kx = 0; kx < k; ++kx) {
                                acc += static_cast<double>(wt[((o * in_pg + i) * k + ky) * k + kx]) *
                                       padded.at(g * in_pg + i, y * stride + ky, x * stride + kx);
                                ++macs_;
                            }
                    out.at(o, y, x) = static_cast<float>(acc * scale[o] + shift[o]);
                }
            }
        }
        return out;
    }

    std::vector<float> dense(const std::vector<float>& x, const std::string& prefix, u64 out_f) {
        const auto& wt = weights_.at(prefix + ".weight").data;
        const auto& b = weights_.at(prefix + ".bias").data;
        std::vector<float> y(out_f);
        for (u64 o = 0; o < out_f; ++o) {
            double acc = b[o];
            for (u64 i = 0; i < x.size(); ++i) {
                acc += static_cast<double>(wt[o * x.size() + i]) * x[i];
                ++macs_;
            }
            y[o] = static_cast<float>(acc);
        }
        return y;
    }

private:
    const TensorMap& weights_;
    u64 macs_ = 0;
};

void activate(std::vector<float>& v, Activation act) {
    for (float& x : v) {
        if (act == Activation::relu) x = x > 0.0f ? x : 0.0f;
        if (act == Activation::hardswish) x = x * std::min(std::max(x + 3.0f, 0.0f), 6.0f) / 6.0f;
    }
}

std::vector<float> mean_per_channel(const Map& m) {
    std::vector<float> out(m.c);
    for (u64 c = 0; c < m.c; ++c) {
        double acc = 0.0;
        for (u64 i = 0; i < m.h * m.w; ++i) acc += m.v[c * m.h * m.w + i];
        out[c] = static_cast<float>(acc / static_cast<double>(m.h * m.w));
    }
    return out;
}

}  // namespace

ComplexityReport complexity_report(const ArchSpec& spec, std::size_t input_frames) {
    validate_arch(spec);
    if (input_frames == 0) throw Error(ErrorKind::invalid_input, "input_frames must be at least 1");
    ComplexityReport r;
    r.alpha = spec.alpha;
    r.input_frames = input_frames;

    Dims d{static_cast<u64>(spec.input_bins), static_cast<u64>(input_frames)};
    u64 ch = static_cast<u64>(spec.in_channels);
    auto add = [&](std::string name, u64 params, u64 macs) {
        r.per_layer.push_back({std::move(name), params, macs});
    };

    if (spec.in_conv) {
        const auto& c = *spec.in_conv;
        const u64 k = static_cast<u64>(c.kernel);
        const u64 out = static_cast<u64>(c.out_channels);
        d = conv_dims(d, c.kernel, c.stride);
        add("in_conv", conv_params(ch, out, k), d.h * d.w * k * k * ch * out);
        ch = out;
    }
    for (const auto& b : spec.blocks) {
        const std::string p = block_prefix(b.index);
        const u64 e = static_cast<u64>(b.expansion_channels);
        const u64 o = static_cast<u64>(b.out_channels);
        const u64 k = static_cast<u64>(b.kernel);
        if (b.has_expand()) add(p + ".expand", conv_params(ch, e, 1), d.h * d.w * ch * e);
        d = conv_dims(d, b.kernel, b.stride);
        add(p + ".depthwise", conv_params(1, e, k), d.h * d.w * k * k * e);
        if (b.has_se()) {
            const u64 sq = static_cast<u64>(*b.se_bottleneck);
            add(p + ".se", linear_params(e, sq) + linear_params(sq, e), 2 * e * sq);
        }
        add(p + ".project", conv_params(e, o, 1), d.h * d.w * e * o);
        ch = o;
    }
    if (spec.head) {
        const u64 c1 = static_cast<u64>(spec.head->clf1_channels);
        const u64 c2 = static_cast<u64>(spec.head->clf2_features);
        const u64 c3 = static_cast<u64>(spec.head->clf3_classes);
        add("head.clf1", conv_params(ch, c1, 1), d.h * d.w * ch * c1);
        add("head.clf2", linear_params(c1, c2), c1 * c2);
        add("head.clf3", linear_params(c2, c3), c2 * c3);
    }
    for (const auto& l : r.per_layer) {
        r.total_params += l.params;
        r.total_macs += l.macs;
    }
    return r;
}

std::uint64_t count_params(const ArchSpec& spec) { return complexity_report(spec, 1).total_params; }

std::uint64_t count_macs(const ArchSpec& spec, std::size_t input_frames) {
    return complexity_report(spec, input_frames).total_macs;
}

std::uint64_t instrumented_mac_oracle(const ArchSpec& spec, const TensorMap& weights,
                                      const MelSpec& mel) {
    validate_arch(spec);
    const auto report = validate_weights(spec, weights);
    if (!report.ok()) throw IntegrityError(report.issues.front().name, report.describe());
    if (spec.in_channels != 1 || mel.n_mels != static_cast<std::size_t>(spec.input_bins))
        throw Error(ErrorKind::invalid_input, "mel spectrogram does not match network input");

    CountingExecutor exec(weights);
    Map x{1, mel.n_mels, mel.n_frames, std::vector<float>(mel.n_mels * mel.n_frames)};
    for (u64 t = 0; t < mel.n_frames; ++t)
        for (u64 m = 0; m < mel.n_mels; ++m) x.at(0, m, t) = mel.at(t, m);

    if (spec.in_conv) {
        const auto& c = *spec.in_conv;
        x = exec.conv_bn(x, "in_conv", static_cast<u64>(c.out_channels), c.kernel, c.stride, 1);
        activate(x.v, c.activation);
    }
    for (const auto& b : spec.blocks) {
        const std::string p = block_prefix(b.index);
        const u64 e = static_cast<u64>(b.expansion_channels);
        Map h = x;
        if (b.has_expand()) {
            h = exec.conv_bn(x, p + ".expand", e, 1, 1, 1);
            activate(h.v, b.activation);
        }
        h = exec.conv_bn(h, p + ".depthwise", e, b.kernel, b.stride, e);
        activate(h.v, b.activation);
        if (b.has_se()) {
            auto s = exec.dense(mean_per_channel(h), p + ".se.fc1", static_cast<u64>(*b.se_bottleneck));
            activate(s, Activation::relu);
            auto g = exec.dense(s, p + ".se.fc2", e);
            for (u64 c = 0; c < e; ++c) {
                const float gate = std::min(std::max(g[c] + 3.0f, 0.0f), 6.0f) / 6.0f;
                for (u64 i = 0; i < h.h * h.w; ++i) h.v[c * h.h * h.w + i] *= gate;
            }
        }
        Map out = exec.conv_bn(h, p + ".project", static_cast<u64>(b.out_channels), 1, 1, 1);
        if (b.has_residual())
            for (u64 i = 0; i < out.v.size(); ++i) out.v[i] += x.v[i];
        x = std::move(out);
    }
    if (spec.head) {
        Map f = exec.conv_bn(x, "head.clf1", static_cast<u64>(spec.head->clf1_channels), 1, 1, 1);
        activate(f.v, Activation::hardswish);
        auto v = exec.dense(mean_per_channel(f), "head.clf2", static_cast<u64>(spec.head->clf2_features));
        activate(v, Activation::hardswish);
        exec.dense(v, "head.clf3", static_cast<u64>(spec.head->clf3_classes));
    }
    return exec.macs();
}

}  // namespace gpae
