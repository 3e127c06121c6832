#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpae::oracle {

std::vector<std::vector<double>> naive_logmel(const std::vector<float>& samples, int sample_rate,
                                              int n_mels, int win, int hop, int n_fft, double fmin,
                                              double fmax, double log_floor) {
    const std::size_t n = samples.size();
    const std::size_t half = static_cast<std::size_t>(win / 2);
    // numpy-style "reflect": edge sample not repeated.
    std::vector<double> padded;
    for (std::size_t i = half; i >= 1; --i) padded.push_back(samples[i]);
    for (float s : samples) padded.push_back(s);
    for (std::size_t i = 1; i <= half; ++i) padded.push_back(samples[n - 1 - i]);

    auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
    auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const int n_bins = n_fft / 2 + 1;
    std::vector<double> pts(n_mels + 2);
    for (int i = 0; i < n_mels + 2; ++i)
        pts[i] = hz(mel(fmin) + (mel(fmax) - mel(fmin)) * i / (n_mels + 1));

    const std::size_t n_frames = (padded.size() - static_cast<std::size_t>(win)) / hop + 1;
    std::vector<std::vector<double>> out(n_frames, std::vector<double>(n_mels));
    std::vector<double> power(n_bins);
    for (std::size_t t = 0; t < n_frames; ++t) {
        for (int k = 0; k < n_bins; ++k) {
            double re = 0.0, im = 0.0;
            for (int j = 0; j < win; ++j) {
                const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * j / win));
                const double x = w * padded[t * hop + j];
                const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) * j / n_fft;
                re += x * std::cos(phase);
                im -= x * std::sin(phase);
            }
            power[k] = re * re + im * im;
        }
        for (int m = 0; m < n_mels; ++m) {
            double e = 0.0;
            for (int k = 0; k < n_bins; ++k) {
                const double f = static_cast<double>(k) * sample_rate / n_fft;
                double weight = 0.0;
                if (f > pts[m] && f <= pts[m + 1]) weight = (f - pts[m]) / (pts[m + 1] - pts[m]);
                else if (f > pts[m + 1] && f < pts[m + 2]) weight = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
                e += weight * power[k];
            }
            out[t][m] = std::log(e + log_floor);
        }
    }
    return out;
}

std::size_t enumerate_frames(std::size_t n, std::size_t hop) {
    std::size_t count = 0;
    for (std::size_t center = 0; center <= n; center += hop) ++count;
    return count;
}

FeatureMap conv2d(const FeatureMap& in, const std::vector<float>& weight,
                  const std::vector<float>& bias, int out_channels, int kernel, int stride,
                  int groups) {
    const int pad = kernel / 2;
    const int h = static_cast<int>(in.height), w = static_cast<int>(in.width);
    const int oh = (h + 2 * pad - kernel) / stride + 1;
    const int ow = (w + 2 * pad - kernel) / stride + 1;
    const int in_pg = static_cast<int>(in.channels) / groups;
    const int out_pg = out_channels / groups;
    FeatureMap out(out_channels, oh, ow);
    for (int o = 0; o < out_channels; ++o) {
        const int g = o / out_pg;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = bias.empty() ? 0.0 : bias[o];
                for (int i = 0; i < in_pg; ++i)
                    for (int ky = 0; ky < kernel; ++ky)
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int iy = y * stride + ky - pad;
                            const int ix = x * stride + kx - pad;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                            acc += static_cast<double>(weight[((o * in_pg + i) * kernel + ky) * kernel + kx]) *
                                   in.at(g * in_pg + i, iy, ix);
                        }
                out.at(o, y, x) = static_cast<float>(acc);
            }
    }
    return out;
}

std::vector<float> linear(const std::vector<float>& x, const std::vector<float>& weight,
                          const std::vector<float>& bias) {
    const std::size_t n_out = bias.size();
    std::vector<float> y(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
        double acc = bias[o];
        for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<double>(weight[o * x.size() + i]) * x[i];
        y[o] = static_cast<float>(acc);
    }
    return y;
}

double mean(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

void fill_uniform(std::vector<float>& v, std::mt19937_64& rng, float lo, float hi) {
    std::uniform_real_distribution<float> d(lo, hi);
    for (float& x : v) x = d(rng);
}

FeatureMap random_map(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng) {
    FeatureMap m(c, h, w);
    fill_uniform(m.data, rng);
    return m;
}

double max_rel_error(const std::vector<float>& a, const std::vector<float>& b, double floor) {
    double worst = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]) / std::max<double>(std::abs(b[i]), floor));
    return worst;
}

}  // namespace gpae::oracle
