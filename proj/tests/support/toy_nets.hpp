#pragma once

#include "gpae/arch.hpp"
#include "gpae/mel_frontend.hpp"

#include <random>

namespace gpae::toy {

// Three blocks covering expand/no-expand, SE, stride 2 and residuals on a
// small frequency axis, no head.
inline ArchSpec three_block_spec(int input_bins = 16) {
    ArchSpec s;
    s.alpha = 0.0;
    s.input_bins = input_bins;
    s.in_conv = InConvSpec{8, 3, 2, Activation::hardswish};
    s.blocks = {
        BlockSpec{1, 3, 8, 8, 8, std::nullopt, 1, Activation::relu},
        BlockSpec{2, 5, 8, 24, 16, 8, 2, Activation::hardswish},
        BlockSpec{3, 3, 16, 32, 16, 8, 1, Activation::hardswish},
    };
    return s;
}

// Stride-free variant for cost-linearity checks: no SE, no head.
inline ArchSpec stride_free_spec() {
    ArchSpec s;
    s.alpha = 0.0;
    s.input_bins = 8;
    s.in_conv = InConvSpec{4, 3, 1, Activation::relu};
    s.blocks = {BlockSpec{1, 3, 4, 12, 4, std::nullopt, 1, Activation::relu}};
    return s;
}

inline MelSpec random_mel(std::size_t frames, std::size_t bins, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> d(-3.0f, 1.0f);
    MelSpec m;
    m.n_frames = frames;
    m.n_mels = bins;
    m.data.resize(frames * bins);
    for (float& v : m.data) v = d(rng);
    return m;
}

}  // namespace gpae::toy
