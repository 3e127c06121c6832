#include "gpae/net.hpp"

#include "gpae/error.hpp"

#include <cmath>
#include <sstream>

namespace gpae {

namespace {

std::string kind_name(WeightIssue::Kind kind) {
    switch (kind) {
        case WeightIssue::Kind::missing: return "missing";
        case WeightIssue::Kind::extra: return "extra";
        case WeightIssue::Kind::mis_shaped: return "mis-shaped";
    }
    return "?";
}

void require_finite(std::span<const float> values, const std::string& where) {
    for (float v : values)
        if (!std::isfinite(v))
            throw Error(ErrorKind::numeric_failure, "non-finite activation in " + where);
}

}  // namespace

std::size_t ValidationReport::count(WeightIssue::Kind kind) const {
    std::size_t n = 0;
    for (const auto& issue : issues) n += issue.kind == kind;
    return n;
}

std::string ValidationReport::describe() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        os << kind_name(issue.kind) << ": " << issue.name;
        if (issue.kind == WeightIssue::Kind::mis_shaped)
            os << " expected " << shape_to_string(issue.expected) << " got "
               << shape_to_string(issue.actual);
        os << '\n';
    }
    return os.str();
}

ValidationReport validate_weights(const ArchSpec& spec, const TensorMap& weights) {
    ValidationReport report;
    const auto layout = weight_layout(spec);
    for (const auto& [name, shape] : layout) {
        auto it = weights.find(name);
        if (it == weights.end()) {
            report.issues.push_back({WeightIssue::Kind::missing, name, shape, {}});
        } else if (it->second.shape != shape || it->second.data.size() != element_count(shape)) {
            report.issues.push_back({WeightIssue::Kind::mis_shaped, name, shape, it->second.shape});
        }
    }
    for (const auto& [name, t] : weights)
        if (!layout.contains(name))
            report.issues.push_back({WeightIssue::Kind::extra, name, {}, t.shape});
    return report;
}

Network::Network(ArchSpec spec, const TensorMap& weights, NetOptions options)
    : spec_(std::move(spec)), options_(options) {
    validate_arch(spec_);
    const auto report = validate_weights(spec_, weights);
    if (!report.ok()) {
        const auto& first = report.issues.front();
        throw IntegrityError(first.name, kind_name(first.kind) + " (" +
                                             std::to_string(report.issues.size()) +
                                             " issue(s) total)\n" + report.describe());
    }
    for (const auto& [name, t] : weights) {
        const auto dot = name.rfind('.');
        const std::string prefix = name.substr(0, dot);
        const std::string leaf = name.substr(dot + 1);
        if (leaf == "bn_scale" || leaf == "bn_shift") continue;
        if (leaf == "weight" && weights.contains(prefix + ".bn_scale")) {
            const auto& scale = weights.at(prefix + ".bn_scale").data;
            const std::size_t per_out = t.size() / scale.size();
            std::vector<float> w = t.data;
            for (std::size_t o = 0; o < scale.size(); ++o)
                for (std::size_t j = 0; j < per_out; ++j) w[o * per_out + j] *= scale[o];
            folded_[name] = std::move(w);
            folded_[prefix + ".bias"] = weights.at(prefix + ".bn_shift").data;
        } else {
            folded_[name] = t.data;
        }
    }
}

std::span<const float> Network::param(const std::string& name) const {
    return folded_.at(name);
}

FeatureMap mel_to_input(const MelSpec& mel) {
    FeatureMap x(1, mel.n_mels, mel.n_frames);
    for (std::size_t t = 0; t < mel.n_frames; ++t)
        for (std::size_t m = 0; m < mel.n_mels; ++m) x.at(0, m, t) = mel.at(t, m);
    return x;
}

ActivationTrace Network::forward(const MelSpec& mel) const {
    if (mel.n_frames == 0)
        throw Error(ErrorKind::invalid_input, "mel spectrogram has no frames");
    if (spec_.in_channels != 1 || mel.n_mels != static_cast<std::size_t>(spec_.input_bins))
        throw Error(ErrorKind::invalid_input,
                    "mel spectrogram has " + std::to_string(mel.n_mels) + " bands, network expects " +
                        std::to_string(spec_.input_bins));
    return forward(mel_to_input(mel));
}

ActivationTrace Network::forward(const FeatureMap& input) const {
    if (input.channels != static_cast<std::size_t>(spec_.in_channels) || input.plane() == 0)
        throw Error(ErrorKind::invalid_input,
                    "network input has " + std::to_string(input.channels) + " channels, expected " +
                        std::to_string(spec_.in_channels));
    ActivationTrace trace;
    FeatureMap x = input;

    if (spec_.in_conv) {
        const auto& c = *spec_.in_conv;
        x = conv2d(x, param("in_conv.weight"), param("in_conv.bias"), c.out_channels, c.kernel,
                   c.stride);
        apply_activation(x.data, c.activation);
    }

    for (const auto& b : spec_.blocks) {
        const std::string p = block_prefix(b.index);
        FeatureMap h;
        if (b.has_expand()) {
            h = pointwise_conv(x, param(p + ".expand.weight"), param(p + ".expand.bias"),
                               b.expansion_channels);
            apply_activation(h.data, b.activation);
        } else {
            h = x;
        }
        h = depthwise_conv2d(h, param(p + ".depthwise.weight"), param(p + ".depthwise.bias"),
                             b.kernel, b.stride);
        apply_activation(h.data, b.activation);
        if (b.has_se()) {
            trace.se_bottlenecks[b.index] =
                squeeze_excite(h, param(p + ".se.fc1.weight"), param(p + ".se.fc1.bias"),
                               param(p + ".se.fc2.weight"), param(p + ".se.fc2.bias"),
                               *b.se_bottleneck, options_.se_gate);
        }
        h = pointwise_conv(h, param(p + ".project.weight"), param(p + ".project.bias"),
                           b.out_channels);
        if (b.has_residual())
            for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] += x.data[i];
        require_finite(h.data, "block " + std::to_string(b.index));
        trace.block_outputs[b.index] = h;
        x = std::move(h);
    }

    if (spec_.head) {
        const auto& hd = *spec_.head;
        FeatureMap f = pointwise_conv(x, param("head.clf1.weight"), param("head.clf1.bias"),
                                      hd.clf1_channels);
        apply_activation(f.data, Activation::hardswish);
        trace.clf1 = global_avg_pool(f);
        trace.clf2 = linear(trace.clf1, param("head.clf2.weight"), param("head.clf2.bias"),
                            hd.clf2_features);
        apply_activation(trace.clf2, Activation::hardswish);
        trace.clf3 = linear(trace.clf2, param("head.clf3.weight"), param("head.clf3.bias"),
                            hd.clf3_classes);
        require_finite(trace.clf1, "clf1");
        require_finite(trace.clf2, "clf2");
        require_finite(trace.clf3, "clf3");
    }
    for (const auto& [idx, v] : trace.se_bottlenecks)
        require_finite(v, "SE bottleneck of block " + std::to_string(idx));
    return trace;
}

ActivationTrace forward(const ArchSpec& spec, const TensorMap& weights, const MelSpec& mel,
                        NetOptions options) {
    return Network(spec, weights, options).forward(mel);
}

}  // namespace gpae
