#include "gpae/mel_frontend.hpp"

#include "gpae/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace gpae {

namespace {

// The FFTW planner is not re-entrant; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct BandWeights {
    std::size_t first_bin = 0;
    std::vector<double> weights;
};

}  // namespace

void FrontendConfig::validate() const {
    auto fail = [](const std::string& what) {
        throw Error(ErrorKind::invalid_config, "frontend config: " + what);
    };
    if (sample_rate_hz <= 0) fail("sample_rate_hz must be positive");
    if (n_mels <= 0) fail("n_mels must be positive");
    if (win_samples <= 0 || hop_samples <= 0 || fft_size <= 0)
        fail("window, hop and fft sizes must be positive");
    if (win_samples > fft_size) fail("win_samples exceeds fft_size");
    if (hop_samples > win_samples) fail("hop_samples exceeds win_samples");
    if (!(log_floor > 0.0) || !std::isfinite(log_floor)) fail("log_floor must be > 0");
    if (!(mel_fmin_hz >= 0.0) || !(mel_fmin_hz < mel_fmax_hz))
        fail("mel_fmin_hz must be >= 0 and below mel_fmax_hz");
    if (mel_fmax_hz > sample_rate_hz / 2.0) fail("mel_fmax_hz exceeds Nyquist");
    if (!std::isfinite(norm_shift)) fail("norm_shift must be finite");
    if (!std::isfinite(norm_scale) || norm_scale == 0.0) fail("norm_scale must be finite and non-zero");
}

std::size_t frame_count(std::size_t n_samples, int hop_samples) {
    return n_samples / static_cast<std::size_t>(hop_samples) + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double mel_band_center_hz(const FrontendConfig& cfg, int band) {
    const double lo = hz_to_mel(cfg.mel_fmin_hz);
    const double hi = hz_to_mel(cfg.mel_fmax_hz);
    return mel_to_hz(lo + (band + 1) * (hi - lo) / (cfg.n_mels + 1));
}

std::vector<std::vector<double>> mel_filterbank(const FrontendConfig& cfg) {
    const int n_bins = cfg.fft_size / 2 + 1;
    const double lo = hz_to_mel(cfg.mel_fmin_hz);
    const double hi = hz_to_mel(cfg.mel_fmax_hz);
    std::vector<double> edges(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i)
        edges[i] = mel_to_hz(lo + i * (hi - lo) / (cfg.n_mels + 1));

    std::vector<std::vector<double>> fb(cfg.n_mels, std::vector<double>(n_bins, 0.0));
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
        for (int k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * cfg.sample_rate_hz / cfg.fft_size;
            const double up = (f - left) / (center - left);
            const double down = (right - f) / (right - center);
            fb[m][k] = std::max(0.0, std::min(up, down));
        }
    }
    return fb;
}

std::vector<double> analysis_window(const FrontendConfig& cfg) {
    std::vector<double> w(cfg.fft_size, 0.0);
    for (int n = 0; n < cfg.win_samples; ++n)
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.win_samples);
    return w;
}

std::size_t reflect_index(std::ptrdiff_t index, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t i = index % period;
    if (i < 0) i += period;
    if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

struct MelFrontend::Impl {
    std::vector<double> window;
    std::vector<BandWeights> bands;
    fftw_plan plan = nullptr;

    ~Impl() {
        if (plan) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

MelFrontend::MelFrontend(FrontendConfig cfg) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
    cfg_.validate();
    impl_->window = analysis_window(cfg_);

    const auto dense = mel_filterbank(cfg_);
    impl_->bands.resize(dense.size());
    for (std::size_t m = 0; m < dense.size(); ++m) {
        const auto& row = dense[m];
        auto first = std::find_if(row.begin(), row.end(), [](double v) { return v > 0.0; });
        auto last = std::find_if(row.rbegin(), row.rend(), [](double v) { return v > 0.0; }).base();
        if (first < last) {
            impl_->bands[m].first_bin = static_cast<std::size_t>(first - row.begin());
            impl_->bands[m].weights.assign(first, last);
        }
    }

    const int n = cfg_.fft_size;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    {
        std::lock_guard lock(planner_mutex());
        impl_->plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_free(in);
    fftw_free(out);
    if (!impl_->plan) throw Error(ErrorKind::invalid_config, "could not create FFT plan");
}

MelFrontend::~MelFrontend() = default;
MelFrontend::MelFrontend(MelFrontend&&) noexcept = default;
MelFrontend& MelFrontend::operator=(MelFrontend&&) noexcept = default;

MelSpec MelFrontend::compute(const AudioClip& clip) const {
    if (clip.samples.empty())
        throw Error(ErrorKind::invalid_input, "cannot compute a mel spectrogram of an empty clip");
    if (clip.sample_rate_hz != cfg_.sample_rate_hz)
        throw Error(ErrorKind::unsupported_rate,
                    "expected " + std::to_string(cfg_.sample_rate_hz) + " Hz audio, got " +
                        std::to_string(clip.sample_rate_hz) + " Hz");

    const std::size_t n = clip.samples.size();
    const std::size_t n_frames = frame_count(n, cfg_.hop_samples);
    const std::size_t n_bins = static_cast<std::size_t>(cfg_.fft_size / 2 + 1);
    const auto half = static_cast<std::ptrdiff_t>(cfg_.win_samples / 2);

    MelSpec spec;
    spec.n_frames = n_frames;
    spec.n_mels = static_cast<std::size_t>(cfg_.n_mels);
    spec.frame_hop_s = static_cast<double>(cfg_.hop_samples) / cfg_.sample_rate_hz;
    spec.win_len_s = static_cast<double>(cfg_.win_samples) / cfg_.sample_rate_hz;
    spec.data.resize(n_frames * spec.n_mels);

    std::vector<double> frame(cfg_.fft_size, 0.0);
    std::vector<fftw_complex> bins(n_bins);
    std::vector<double> power(n_bins);

    for (std::size_t t = 0; t < n_frames; ++t) {
        const auto start = static_cast<std::ptrdiff_t>(t) * cfg_.hop_samples - half;
        for (int i = 0; i < cfg_.win_samples; ++i) {
            const std::ptrdiff_t src = start + i;
            const float s = (src >= 0 && src < static_cast<std::ptrdiff_t>(n))
                                ? clip.samples[static_cast<std::size_t>(src)]
                                : clip.samples[reflect_index(src, n)];
            frame[i] = impl_->window[i] * static_cast<double>(s);
        }
        fftw_execute_dft_r2c(impl_->plan, frame.data(), bins.data());
        for (std::size_t k = 0; k < n_bins; ++k)
            power[k] = bins[k][0] * bins[k][0] + bins[k][1] * bins[k][1];

        float* row = spec.data.data() + t * spec.n_mels;
        for (std::size_t m = 0; m < spec.n_mels; ++m) {
            const auto& band = impl_->bands[m];
            double energy = 0.0;
            for (std::size_t j = 0; j < band.weights.size(); ++j)
                energy += band.weights[j] * power[band.first_bin + j];
            const double logmel = std::log(energy + cfg_.log_floor);
            row[m] = static_cast<float>((logmel - cfg_.norm_shift) / cfg_.norm_scale);
        }
    }
    return spec;
}

MelSpec compute_melspec(const AudioClip& clip, const FrontendConfig& cfg) {
    return MelFrontend(cfg).compute(clip);
}

Embedding low_level_features(const MelSpec& spec) {
    Embedding out;
    out.selector = FeatureSelector({FeaturePart::L});
    std::vector<double> acc(spec.n_mels, 0.0);
    for (std::size_t t = 0; t < spec.n_frames; ++t) {
        const auto row = spec.frame(t);
        for (std::size_t m = 0; m < spec.n_mels; ++m) acc[m] += row[m];
    }
    out.values.resize(spec.n_mels);
    for (std::size_t m = 0; m < spec.n_mels; ++m)
        out.values[m] = static_cast<float>(acc[m] / static_cast<double>(spec.n_frames));
    return out;
}

}  // namespace gpae
