#include "gpae/feature_taps.hpp"

#include "gpae/error.hpp"
#include "gpae/kernels.hpp"

#include <string>

namespace gpae {

namespace {

const BlockSpec& tapped_block(const ArchSpec& spec, int index) {
    const BlockSpec* b = spec.block(index);
    if (!b)
        throw Error(ErrorKind::structural,
                    "architecture has no block " + std::to_string(index) + " to tap");
    return *b;
}

void append(std::vector<float>& out, std::span<const float> values) {
    out.insert(out.end(), values.begin(), values.end());
}

void require_head(const std::vector<float>& v, FeaturePart part) {
    if (v.empty())
        throw Error(ErrorKind::structural,
                    "trace has no classifier head output for " + std::string(to_string(part)));
}

}  // namespace

std::size_t part_dim(const ArchSpec& spec, FeaturePart part) {
    switch (part) {
        case FeaturePart::L: return static_cast<std::size_t>(spec.input_bins);
        case FeaturePart::M_B: {
            std::size_t n = 0;
            for (int idx : kMidLevelBlocks) n += static_cast<std::size_t>(tapped_block(spec, idx).out_channels);
            return n;
        }
        case FeaturePart::M_SE: {
            std::size_t n = 0;
            for (int idx : kMidLevelBlocks) {
                const auto& b = tapped_block(spec, idx);
                if (!b.has_se())
                    throw Error(ErrorKind::structural,
                                "block " + std::to_string(idx) + " has no SE layer");
                n += static_cast<std::size_t>(*b.se_bottleneck);
            }
            return n;
        }
        case FeaturePart::H_CLF1:
        case FeaturePart::H_CLF2:
        case FeaturePart::H_CLF3:
            if (!spec.head) throw Error(ErrorKind::structural, "architecture has no classifier head");
            if (part == FeaturePart::H_CLF1) return static_cast<std::size_t>(spec.head->clf1_channels);
            if (part == FeaturePart::H_CLF2) return static_cast<std::size_t>(spec.head->clf2_features);
            return static_cast<std::size_t>(spec.head->clf3_classes);
    }
    return 0;
}

std::size_t embedding_dim(const ArchSpec& spec, const FeatureSelector& selector) {
    std::size_t n = 0;
    for (FeaturePart p : selector.parts()) n += part_dim(spec, p);
    return n;
}

std::size_t embedding_dim(double alpha, const FeatureSelector& selector) {
    return embedding_dim(build_arch(alpha), selector);
}

Embedding extract(const ActivationTrace& trace, const MelSpec& mel,
                  const FeatureSelector& selector) {
    Embedding out;
    out.selector = selector;
    for (FeaturePart part : selector.parts()) {
        switch (part) {
            case FeaturePart::L:
                append(out.values, low_level_features(mel).values);
                break;
            case FeaturePart::M_B:
                for (int idx : kMidLevelBlocks) {
                    auto it = trace.block_outputs.find(idx);
                    if (it == trace.block_outputs.end())
                        throw Error(ErrorKind::structural,
                                    "trace has no output for block " + std::to_string(idx));
                    append(out.values, global_avg_pool(it->second));
                }
                break;
            case FeaturePart::M_SE:
                for (int idx : kMidLevelBlocks) {
                    auto it = trace.se_bottlenecks.find(idx);
                    if (it == trace.se_bottlenecks.end())
                        throw Error(ErrorKind::structural,
                                    "block " + std::to_string(idx) + " has no SE bottleneck in trace");
                    append(out.values, it->second);
                }
                break;
            case FeaturePart::H_CLF1:
                require_head(trace.clf1, part);
                append(out.values, trace.clf1);
                break;
            case FeaturePart::H_CLF2:
                require_head(trace.clf2, part);
                append(out.values, trace.clf2);
                break;
            case FeaturePart::H_CLF3:
                require_head(trace.clf3, part);
                append(out.values, trace.clf3);
                break;
        }
    }
    return out;
}

Embedding mean_embedding(std::span<const Embedding> embeddings) {
    if (embeddings.empty()) throw Error(ErrorKind::invalid_input, "cannot average zero embeddings");
    const std::size_t dim = embeddings.front().dim();
    std::vector<double> acc(dim, 0.0);
    for (const auto& e : embeddings) {
        if (e.dim() != dim)
            throw Error(ErrorKind::invalid_input, "cannot average embeddings of different widths");
        for (std::size_t i = 0; i < dim; ++i) acc[i] += e.values[i];
    }
    Embedding out;
    out.selector = embeddings.front().selector;
    out.values.resize(dim);
    const double inv = 1.0 / static_cast<double>(embeddings.size());
    for (std::size_t i = 0; i < dim; ++i) out.values[i] = static_cast<float>(acc[i] * inv);
    return out;
}

}  // namespace gpae
