#pragma once

#include "gpae/arch.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gpae {

// One forward pass over 10 s of audio at a 10 ms hop.
inline constexpr std::size_t kFramesPer10s = 1001;

struct LayerCost {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t macs = 0;
};

struct ComplexityReport {
    double alpha = 0.0;
    std::size_t input_frames = 0;
    std::vector<LayerCost> per_layer;
    std::uint64_t total_params = 0;
    std::uint64_t total_macs = 0;
};

// Parameters as trained: conv weights plus a BN scale/shift pair per conv
// output channel; linear and SE layers with bias.
std::uint64_t count_params(const ArchSpec& spec);

// Multiply-accumulates of conv, linear and SE FC layers for one forward pass
// over a spec.input_bins x input_frames map. Activations, pooling, gating
// and (folded) BN are free.
std::uint64_t count_macs(const ArchSpec& spec, std::size_t input_frames = kFramesPer10s);

ComplexityReport complexity_report(const ArchSpec& spec, std::size_t input_frames = kFramesPer10s);

// Executes the network with naive loop nests over explicitly zero-padded
// inputs, counting one MAC per multiply-add performed. Independent of the
// analytic counter and of the production kernels.
std::uint64_t instrumented_mac_oracle(const ArchSpec& spec, const TensorMap& weights,
                                      const MelSpec& mel);

}  // namespace gpae
