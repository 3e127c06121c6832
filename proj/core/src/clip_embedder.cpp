#include "gpae/clip_embedder.hpp"

#include "gpae/error.hpp"
#include "gpae/feature_taps.hpp"
#include "gpae/parallel.hpp"

#include <cmath>

namespace gpae {

namespace {

std::size_t seconds_to_samples(double seconds, int rate) {
    return static_cast<std::size_t>(std::llround(seconds * rate));
}

AudioClip segment(const AudioClip& clip, std::size_t begin, std::size_t length) {
    AudioClip out;
    out.sample_rate_hz = clip.sample_rate_hz;
    out.samples.assign(length, 0.0f);
    if (begin < clip.samples.size()) {
        const std::size_t n = std::min(length, clip.samples.size() - begin);
        std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin), n, out.samples.begin());
    }
    return out;
}

void check_clip(const AudioClip& clip, const Extractor& model) {
    if (clip.samples.empty()) throw Error(ErrorKind::invalid_input, "clip has no samples");
    if (clip.sample_rate_hz != model.frontend().config().sample_rate_hz)
        throw Error(ErrorKind::unsupported_rate,
                    "clip is sampled at " + std::to_string(clip.sample_rate_hz) + " Hz, model expects " +
                        std::to_string(model.frontend().config().sample_rate_hz) + " Hz");
}

}  // namespace

Extractor::Extractor(Network network, FrontendConfig frontend)
    : network_(std::move(network)), frontend_(frontend) {
    if (static_cast<int>(frontend.n_mels) != network_.arch().input_bins)
        throw Error(ErrorKind::invalid_config,
                    "frontend produces " + std::to_string(frontend.n_mels) +
                        " mel bands but the network expects " +
                        std::to_string(network_.arch().input_bins));
}

Embedding Extractor::embed(const AudioClip& segment, const FeatureSelector& selector) const {
    const MelSpec mel = frontend_.compute(segment);
    if (!selector.needs_network()) return extract(ActivationTrace{}, mel, selector);
    return extract(network_.forward(mel), mel, selector);
}

std::size_t scene_frame_count(std::size_t n_samples, std::size_t frame_len) {
    return std::max<std::size_t>(1, (n_samples + frame_len - 1) / frame_len);
}

std::size_t timestamp_window_count(std::size_t n_samples, std::size_t window, std::size_t hop) {
    if (n_samples < window) return 1;
    return (n_samples - window) / hop + 1;
}

SceneEmbedding scene_embedding(const AudioClip& clip, const Extractor& model,
                               const FeatureSelector& selector, EmbedOptions options) {
    check_clip(clip, model);
    const std::size_t frame_len = seconds_to_samples(kSceneFrameSeconds, clip.sample_rate_hz);
    const std::size_t n = scene_frame_count(clip.samples.size(), frame_len);

    std::vector<Embedding> per_frame(n);
    detail::parallel_for(n, options.threads, [&](std::size_t i) {
        per_frame[i] = model.embed(segment(clip, i * frame_len, frame_len), selector);
    });
    return {mean_embedding(per_frame), n};
}

TimestampEmbeddings timestamp_embeddings(const AudioClip& clip, const Extractor& model,
                                         const FeatureSelector& selector, EmbedOptions options) {
    check_clip(clip, model);
    const int rate = clip.sample_rate_hz;
    const std::size_t window = seconds_to_samples(kTimestampWindowSeconds, rate);
    const std::size_t hop = seconds_to_samples(kTimestampHopSeconds, rate);
    const std::size_t n = timestamp_window_count(clip.samples.size(), window, hop);

    TimestampEmbeddings out;
    out.timestamps_s.resize(n);
    out.embeddings.resize(n);
    detail::parallel_for(n, options.threads, [&](std::size_t i) {
        out.embeddings[i] = model.embed(segment(clip, i * hop, window), selector);
    });
    for (std::size_t i = 0; i < n; ++i)
        out.timestamps_s[i] = static_cast<double>(i) * kTimestampHopSeconds + kTimestampWindowSeconds / 2;
    return out;
}

}  // namespace gpae
