#pragma once

#include "gpae/embedding.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/net.hpp"

#include <cstddef>
#include <vector>

namespace gpae {

// A loaded network together with the frontend it was trained with.
class Extractor {
public:
    Extractor(Network network, FrontendConfig frontend = {});

    const Network& network() const { return network_; }
    const MelFrontend& frontend() const { return frontend_; }

    // melspec -> forward -> extract for one segment. The forward pass is
    // skipped when the selector only asks for L.
    Embedding embed(const AudioClip& segment, const FeatureSelector& selector) const;

private:
    Network network_;
    MelFrontend frontend_;
};

struct SceneEmbedding {
    Embedding embedding;
    std::size_t n_frames_averaged = 0;
};

struct TimestampEmbeddings {
    std::vector<double> timestamps_s;
    std::vector<Embedding> embeddings;
};

inline constexpr double kSceneFrameSeconds = 10.0;
inline constexpr double kTimestampWindowSeconds = 0.160;
inline constexpr double kTimestampHopSeconds = 0.050;

// ceil(n / frame_len), at least 1.
std::size_t scene_frame_count(std::size_t n_samples, std::size_t frame_len);
// floor((n - window) / hop) + 1 for n >= window, else 1.
std::size_t timestamp_window_count(std::size_t n_samples, std::size_t window, std::size_t hop);

// Workers used when evaluating frames/windows; results do not depend on it.
struct EmbedOptions {
    unsigned threads = 1;
};

// Mean embedding over consecutive 10 s frames; the last frame is
// zero-padded to full length.
SceneEmbedding scene_embedding(const AudioClip& clip, const Extractor& model,
                               const FeatureSelector& selector, EmbedOptions options = {});

// Embeddings of 160 ms windows every 50 ms, stamped at window centers.
TimestampEmbeddings timestamp_embeddings(const AudioClip& clip, const Extractor& model,
                                         const FeatureSelector& selector,
                                         EmbedOptions options = {});

}  // namespace gpae
