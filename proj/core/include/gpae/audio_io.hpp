#pragma once

#include "gpae/mel_frontend.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gpae {

enum class WavEncoding { pcm16, pcm24, float32 };

// Decodes PCM16, PCM24 or float32 WAV (plain or extensible format), mixes
// down to mono by averaging channels.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_wav(std::span<const float> interleaved, int channels,
                                     int sample_rate_hz, WavEncoding encoding);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::float32);

// Linear-interpolation resampler. Returns the input unchanged when the rate
// already matches.
AudioClip resample_linear(const AudioClip& clip, int target_rate_hz);

}  // namespace gpae
