#pragma once

#include "gpae/arch.hpp"
#include "gpae/embedding.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/net.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gpae {

// Blocks whose outputs (M_B) and SE bottlenecks (M_SE) form the mid-level
// feature sets, in concatenation order.
inline constexpr std::array<int, 4> kMidLevelBlocks{5, 11, 13, 15};

// Width of one feature part for a given architecture.
std::size_t part_dim(const ArchSpec& spec, FeaturePart part);

// Static embedding width, no forward pass required.
std::size_t embedding_dim(const ArchSpec& spec, const FeatureSelector& selector);
std::size_t embedding_dim(double alpha, const FeatureSelector& selector);

// Assembles the selected parts from a trace and the mel spectrogram that
// produced it. Throws structural errors when the trace lacks a tapped block.
Embedding extract(const ActivationTrace& trace, const MelSpec& mel,
                  const FeatureSelector& selector);

// Elementwise mean of equally sized embeddings.
Embedding mean_embedding(std::span<const Embedding> embeddings);

}  // namespace gpae
