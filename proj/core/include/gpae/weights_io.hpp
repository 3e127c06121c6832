#pragma once

// Binary model and embedding files. All integers are little-endian.
//
// Model file ("GPAE"):
//   char[4]  magic "GPAE"
//   u32      format version (1)
//   u32      config length, then that many bytes of UTF-8 JSON
//   u32      tensor count
//   per tensor:
//     u32    name length, then UTF-8 name
//     u32    rank, then rank x u32 dims
//     u64    element count (must equal the dims product)
//     f32    element count x little-endian IEEE-754 floats
//
// Embedding file ("GPAV"):
//   char[4]  magic "GPAV"
//   u32      format version (1)
//   u32      selector length, then UTF-8 selector string
//   u32      dim
//   u32      count
//   u32      flags (bit 0: timestamps present)
//   f64      count x timestamps in seconds, if flagged
//   f32      count x dim row-major values

#include "gpae/arch.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/net.hpp"
#include "gpae/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gpae {

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

struct ModelConfig {
    ArchSpec arch;
    FrontendConfig frontend;
    NetOptions net;
    std::string padding = "symmetric";

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelFile {
    ModelConfig config;
    TensorMap weights;
};

std::string config_to_json(const ModelConfig& config);
// Throws invalid_config on malformed or out-of-range values.
ModelConfig config_from_json(std::string_view text);

std::vector<std::uint8_t> encode_model(const ModelFile& model);
// Never reads out of bounds: any malformed input throws FormatError,
// IntegrityError or an invalid_config Error.
ModelFile decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

// Fan-in scaled uniform weights, unit BN scale, zero shifts and biases drawn
// from a small uniform range. Deterministic per seed.
TensorMap random_init(const ArchSpec& spec, std::uint64_t seed);

ModelFile make_random_model(double alpha, std::uint64_t seed, FrontendConfig frontend = {});

// Materializes the network described by a model file.
Network make_network(const ModelFile& model);

struct EmbeddingFile {
    std::string selector;
    std::uint32_t dim = 0;
    std::vector<double> timestamps;  // empty unless produced for timestamps
    std::vector<float> values;       // count x dim

    bool has_timestamps() const { return !timestamps.empty(); }
    std::size_t count() const { return dim ? values.size() / dim : 0; }
    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values).subspan(i * dim, dim);
    }

    friend bool operator==(const EmbeddingFile&, const EmbeddingFile&) = default;
};

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& file);
EmbeddingFile decode_embeddings(std::span<const std::uint8_t> bytes);

void save_embeddings(const std::filesystem::path& path, const EmbeddingFile& file);
EmbeddingFile load_embeddings(const std::filesystem::path& path);

// One row per embedding, 17 significant digits; timestamps (when present)
// form the first column. First line is a header.
std::string embeddings_to_csv(const EmbeddingFile& file);
EmbeddingFile embeddings_from_csv(std::string_view text, std::string selector = {});

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gpae
