#pragma once

#include "gpae/embedding.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gpae {

struct AudioClip {
    std::vector<float> samples;
    int sample_rate_hz = 32000;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

struct FrontendConfig {
    int sample_rate_hz = 32000;
    int n_mels = 128;
    int win_samples = 800;   // 25 ms
    int hop_samples = 320;   // 10 ms
    int fft_size = 1024;
    double mel_fmin_hz = 0.0;
    double mel_fmax_hz = 16000.0;
    double log_floor = 1e-5;
    double norm_shift = 0.0;
    double norm_scale = 1.0;

    // Throws invalid_config when any field is out of range.
    void validate() const;

    friend bool operator==(const FrontendConfig&, const FrontendConfig&) = default;
};

// T x n_mels log-mel matrix, stored frame-major.
struct MelSpec {
    std::size_t n_frames = 0;
    std::size_t n_mels = 0;
    std::vector<float> data;
    double frame_hop_s = 0.010;
    double win_len_s = 0.025;

    std::span<const float> frame(std::size_t t) const {
        return std::span<const float>(data).subspan(t * n_mels, n_mels);
    }
    float at(std::size_t t, std::size_t m) const { return data[t * n_mels + m]; }
};

// Number of frames produced for a clip of n samples under centered framing.
std::size_t frame_count(std::size_t n_samples, int hop_samples);

// Center frequency in Hz of HTK mel band `band`.
double mel_band_center_hz(const FrontendConfig& cfg, int band);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular HTK filterbank, n_mels rows x (fft_size/2 + 1) columns.
std::vector<std::vector<double>> mel_filterbank(const FrontendConfig& cfg);

// Periodic Hann window of win_samples, zero-padded to fft_size on the right.
std::vector<double> analysis_window(const FrontendConfig& cfg);

// Reflect-padded sample lookup used by centered framing: index may lie
// outside [0, n) and is folded back into range.
std::size_t reflect_index(std::ptrdiff_t index, std::size_t n);

// Reusable log-mel extractor. Holds the filterbank and FFT plan; compute()
// is const and safe to call from several threads at once.
class MelFrontend {
public:
    explicit MelFrontend(FrontendConfig cfg = {});
    ~MelFrontend();
    MelFrontend(MelFrontend&&) noexcept;
    MelFrontend& operator=(MelFrontend&&) noexcept;

    const FrontendConfig& config() const { return cfg_; }

    MelSpec compute(const AudioClip& clip) const;

private:
    struct Impl;
    FrontendConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

MelSpec compute_melspec(const AudioClip& clip, const FrontendConfig& cfg);

// Time-averaged log-mel spectrum (feature set L).
Embedding low_level_features(const MelSpec& spec);

}  // namespace gpae
