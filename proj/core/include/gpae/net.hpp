#pragma once

#include "gpae/arch.hpp"
#include "gpae/kernels.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace gpae {

struct NetOptions {
    SeGate se_gate = SeGate::hard_sigmoid;

    friend bool operator==(const NetOptions&, const NetOptions&) = default;
};

struct ActivationTrace {
    // Block index -> block output after the residual add.
    std::map<int, FeatureMap> block_outputs;
    // Block index -> SE bottleneck vector, for SE-equipped blocks only.
    std::map<int, std::vector<float>> se_bottlenecks;
    std::vector<float> clf1;
    std::vector<float> clf2;
    std::vector<float> clf3;

    friend bool operator==(const ActivationTrace&, const ActivationTrace&) = default;
};

struct WeightIssue {
    enum class Kind { missing, extra, mis_shaped };
    Kind kind;
    std::string name;
    Shape expected;
    Shape actual;
};

struct ValidationReport {
    std::vector<WeightIssue> issues;

    bool ok() const { return issues.empty(); }
    std::size_t count(WeightIssue::Kind kind) const;
    std::string describe() const;
};

ValidationReport validate_weights(const ArchSpec& spec, const TensorMap& weights);

// MobileNetV3 forward pass with batch-norm folded into the convolutions at
// construction. Immutable after construction; forward() may run on many
// threads at once.
class Network {
public:
    // Throws IntegrityError if the weights do not match the spec exactly.
    Network(ArchSpec spec, const TensorMap& weights, NetOptions options = {});

    const ArchSpec& arch() const { return spec_; }
    const NetOptions& options() const { return options_; }

    // Input from a mel spectrogram: 1 channel, frequency x time.
    ActivationTrace forward(const MelSpec& mel) const;
    // Input must have arch().in_channels channels.
    ActivationTrace forward(const FeatureMap& input) const;

private:
    std::span<const float> param(const std::string& name) const;

    ArchSpec spec_;
    NetOptions options_;
    std::map<std::string, std::vector<float>> folded_;
};

// Network input map for a mel spectrogram (transposes time-major frames).
FeatureMap mel_to_input(const MelSpec& mel);

ActivationTrace forward(const ArchSpec& spec, const TensorMap& weights, const MelSpec& mel,
                        NetOptions options = {});

}  // namespace gpae
