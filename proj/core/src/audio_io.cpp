#include "gpae/audio_io.hpp"

#include "gpae/error.hpp"
#include "gpae/weights_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace gpae {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void tag(std::vector<std::uint8_t>& b, const char* t) { b.insert(b.end(), t, t + 4); }

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_input, "WAV: " + what); };
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const std::uint8_t* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::size_t len = le32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t avail = bytes.size() - body;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (len < 16 || len > avail) fail("truncated fmt chunk");
            format = le16(chunk + 8);
            channels = le16(chunk + 10);
            rate = le32(chunk + 12);
            bits = le16(chunk + 22);
            if (format == 0xFFFE) {
                if (len < 40) fail("truncated extensible fmt chunk");
                format = le16(chunk + 8 + 24);
            }
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_len = std::min(len, avail);
        }
        if (len > avail) break;
        pos = body + len + (len & 1);
    }
    if (!channels || !rate) fail("missing or empty fmt chunk");
    if (!data) fail("missing data chunk");
    if (rate > 1'000'000) fail("implausible sample rate " + std::to_string(rate));

    const bool pcm16 = format == 1 && bits == 16;
    const bool pcm24 = format == 1 && bits == 24;
    const bool f32 = format == 3 && bits == 32;
    if (!pcm16 && !pcm24 && !f32)
        fail("unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
             " bits); expected PCM16, PCM24 or float32");

    const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * channels;
    const std::size_t n_frames = data_len / frame_bytes;
    AudioClip clip;
    clip.sample_rate_hz = static_cast<int>(rate);
    clip.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::uint8_t* p = data + i * frame_bytes + c * (bits / 8);
            if (pcm16) {
                acc += static_cast<std::int16_t>(le16(p)) / 32768.0;
            } else if (pcm24) {
                std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
                if (v & 0x800000) v -= 0x1000000;
                acc += v / 8388608.0;
            } else {
                acc += std::bit_cast<float>(le32(p));
            }
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_wav(bytes);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_wav(std::span<const float> interleaved, int channels,
                                     int sample_rate_hz, WavEncoding encoding) {
    const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : encoding == WavEncoding::pcm24 ? 24 : 32;
    const std::uint16_t format = encoding == WavEncoding::float32 ? 3 : 1;
    const auto data_len = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
    std::vector<std::uint8_t> b;
    tag(b, "RIFF");
    put32(b, 36 + data_len);
    tag(b, "WAVE");
    tag(b, "fmt ");
    put32(b, 16);
    put16(b, format);
    put16(b, static_cast<std::uint16_t>(channels));
    put32(b, static_cast<std::uint32_t>(sample_rate_hz));
    put32(b, static_cast<std::uint32_t>(sample_rate_hz * channels * (bits / 8)));
    put16(b, static_cast<std::uint16_t>(channels * (bits / 8)));
    put16(b, bits);
    tag(b, "data");
    put32(b, data_len);
    for (float s : interleaved) {
        const double c = std::clamp(static_cast<double>(s), -1.0, 1.0);
        if (encoding == WavEncoding::pcm16) {
            put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp<long>(std::lround(c * 32768.0), -32768, 32767))));
        } else if (encoding == WavEncoding::pcm24) {
            const auto v = static_cast<std::uint32_t>(static_cast<std::int32_t>(std::clamp<long>(std::lround(c * 8388608.0), -8388608, 8388607)));
            b.push_back(static_cast<std::uint8_t>(v));
            b.push_back(static_cast<std::uint8_t>(v >> 8));
            b.push_back(static_cast<std::uint8_t>(v >> 16));
        } else {
            put32(b, std::bit_cast<std::uint32_t>(s));
        }
    }
    return b;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
    write_file(path, encode_wav(clip.samples, 1, clip.sample_rate_hz, encoding));
}

AudioClip resample_linear(const AudioClip& clip, int target_rate_hz) {
    if (target_rate_hz <= 0 || clip.sample_rate_hz <= 0)
        throw Error(ErrorKind::invalid_input, "sample rates must be positive");
    if (clip.sample_rate_hz == target_rate_hz || clip.samples.empty()) {
        AudioClip out = clip;
        out.sample_rate_hz = target_rate_hz;
        return out;
    }
    const std::size_t n_in = clip.samples.size();
    const auto n_out = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_in) * target_rate_hz / clip.sample_rate_hz));
    AudioClip out;
    out.sample_rate_hz = target_rate_hz;
    out.samples.resize(std::max<std::size_t>(1, n_out));
    const double step = static_cast<double>(clip.sample_rate_hz) / target_rate_hz;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double src = static_cast<double>(i) * step;
        const auto i0 = static_cast<std::size_t>(src);
        if (i0 + 1 >= n_in) {
            out.samples[i] = clip.samples[n_in - 1];
            continue;
        }
        const double frac = src - static_cast<double>(i0);
        out.samples[i] = static_cast<float>(clip.samples[i0] * (1.0 - frac) + clip.samples[i0 + 1] * frac);
    }
    return out;
}

}  // namespace gpae
