#include "gpae/complexity.hpp"
#include "gpae/error.hpp"
#include "gpae/weights_io.hpp"

#include "toy_nets.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

using namespace gpae;

namespace {

ModelFile toy_model(std::uint64_t seed = 1) {
    ModelFile m;
    m.config.arch = toy::three_block_spec();
    m.config.arch.alpha = 0.5;
    m.config.frontend.n_mels = 16;
    m.weights = random_init(m.config.arch, seed);
    return m;
}

// Minimal reader written from the byte layout alone.
struct RawTensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
};

struct RawModel {
    std::uint32_t version = 0;
    std::string config;
    std::vector<RawTensor> tensors;
};

RawModel parse_independently(const std::vector<std::uint8_t>& b) {
    std::size_t p = 0;
    auto u32 = [&] {
        const std::uint32_t v = b.at(p) | b.at(p + 1) << 8 | b.at(p + 2) << 16 | std::uint32_t(b.at(p + 3)) << 24;
        p += 4;
        return v;
    };
    auto u64 = [&] {
        const std::uint64_t lo = u32();
        return lo | std::uint64_t(u32()) << 32;
    };
    auto str = [&](std::size_t n) {
        std::string s(b.begin() + p, b.begin() + p + n);
        p += n;
        return s;
    };
    RawModel m;
    REQUIRE(str(4) == "GPAE");
    m.version = u32();
    m.config = str(u32());
    const auto n = u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        RawTensor t;
        t.name = str(u32());
        t.dims.resize(u32());
        for (auto& d : t.dims) d = u32();
        t.values.resize(u64());
        for (auto& v : t.values) v = std::bit_cast<float>(u32());
        m.tensors.push_back(std::move(t));
    }
    CHECK(p == b.size());
    return m;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Offset of the first tensor's rank field.
std::size_t first_rank_offset(const std::vector<std::uint8_t>& b) {
    std::uint32_t config_len;
    std::memcpy(&config_len, b.data() + 8, 4);
    const std::size_t name_at = 12 + config_len + 4;
    std::uint32_t name_len;
    std::memcpy(&name_len, b.data() + name_at, 4);
    return name_at + 4 + name_len;
}

}  // namespace

TEST_CASE("mn01 weights round-trip bit-identically") {
    const auto m = make_random_model(0.1, 3);
    const auto bytes = encode_model(m);
    const auto back = decode_model(bytes);
    CHECK(back.config == m.config);
    REQUIRE(back.weights.size() == m.weights.size());
    for (const auto& [name, t] : m.weights) {
        const auto& u = back.weights.at(name);
        CHECK(u.shape == t.shape);
        CHECK(std::memcmp(u.data.data(), t.data.data(), t.data.size() * 4) == 0);
    }
    CHECK(encode_model(back) == bytes);

    const auto path = std::filesystem::temp_directory_path() / "gpae_rt.gpae";
    save_model(path, m);
    CHECK(encode_model(load_model(path)) == bytes);
    std::filesystem::remove(path);
}

TEST_CASE("the byte layout is readable by an independent parser") {
    auto m = toy_model();
    m.weights.at("b2.se.fc1.bias").data[0] = -0.0f;
    const auto bytes = encode_model(m);
    const auto raw = parse_independently(bytes);
    CHECK(raw.version == 1);
    CHECK(config_from_json(raw.config) == m.config);
    REQUIRE(raw.tensors.size() == m.weights.size());
    for (const auto& t : raw.tensors) {
        const auto& ref = m.weights.at(t.name);
        CHECK(std::vector<std::size_t>(t.dims.begin(), t.dims.end()) == ref.shape);
        CHECK(std::memcmp(t.values.data(), ref.data.data(), ref.data.size() * 4) == 0);
    }
}

TEST_CASE("non-standard architectures round-trip through the config") {
    const auto m = toy_model(4);
    const auto back = decode_model(encode_model(m));
    CHECK(back.config.arch == m.config.arch);
    CHECK(back.config.frontend == m.config.frontend);
    CHECK_NOTHROW(make_network(back));
}

TEST_CASE("bad magic is a format error at offset 0") {
    auto bytes = encode_model(toy_model());
    bytes[3] = 'X';
    try {
        decode_model(bytes);
        FAIL("expected an error");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 0);
        CHECK(e.kind() == ErrorKind::format);
    }
    CHECK_THROWS_AS(decode_model(std::vector<std::uint8_t>{'G', 'P'}), FormatError);
}

TEST_CASE("unknown version is a format error at offset 4") {
    auto bytes = encode_model(toy_model());
    put_u32(bytes, 4, 2);
    try {
        decode_model(bytes);
        FAIL("expected an error");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("dims that disagree with the payload name the tensor") {
    const auto m = toy_model();
    auto bytes = encode_model(m);
    const std::size_t rank_at = first_rank_offset(bytes);
    const std::string first = m.weights.begin()->first;
    put_u32(bytes, rank_at + 4, 9999);
    try {
        decode_model(bytes);
        FAIL("expected an error");
    } catch (const IntegrityError& e) {
        CHECK(e.tensor() == first);
        CHECK(std::string(e.what()).find(first) != std::string::npos);
    }
}

TEST_CASE("truncation and trailing bytes are format errors") {
    const auto bytes = encode_model(toy_model());
    for (std::size_t cut : {bytes.size() - 1, bytes.size() - 4, bytes.size() / 2, std::size_t{13}, std::size_t{5}}) {
        CAPTURE(cut);
        CHECK_THROWS_AS(decode_model(std::span(bytes).first(cut)), FormatError);
    }
    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(decode_model(longer), FormatError);
}

TEST_CASE("weights that do not fit the embedded config are integrity errors") {
    auto m = toy_model();
    m.weights.erase("b3.project.weight");
    const auto bytes = encode_model(m);
    try {
        decode_model(bytes);
        FAIL("expected an error");
    } catch (const IntegrityError& e) {
        CHECK(e.tensor() == "b3.project.weight");
    }
    CHECK_THROWS_AS(save_model(std::filesystem::temp_directory_path() / "gpae_bad.gpae", m), IntegrityError);
}

TEST_CASE("broken config JSON is a format error at the config offset") {
    auto bytes = encode_model(toy_model());
    bytes[12] = '[';
    try {
        decode_model(bytes);
        FAIL("expected an error");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 8);
    }
}

TEST_CASE("decode never fails with anything but typed errors") {
    const auto valid = encode_model(toy_model(2));
    std::mt19937_64 rng(99);
    int typed = 0, accepted = 0;
    for (int i = 0; i < 2000; ++i) {
        auto b = valid;
        switch (i % 4) {
            case 0:
                for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k) b[rng() % b.size()] ^= 1u << (rng() % 8);
                break;
            case 1: b.resize(rng() % b.size()); break;
            case 2:
                for (int k = 0; k < 4; ++k) b[rng() % 64] = static_cast<std::uint8_t>(rng());
                break;
            default:
                b.resize(rng() % 256);
                for (auto& v : b) v = static_cast<std::uint8_t>(rng());
                if (b.size() >= 4 && (rng() & 1)) std::memcpy(b.data(), "GPAE", 4);
        }
        try {
            decode_model(b);
            ++accepted;
        } catch (const Error&) {
            ++typed;
        } catch (const std::exception& e) {
            FAIL("untyped exception: " << e.what());
        }
    }
    CHECK(typed + accepted == 2000);
    CHECK(typed > 1000);
}

TEST_CASE("random init is deterministic per seed and matches the parameter count") {
    const auto spec = build_arch(1.0);
    const auto a = random_init(spec, 11);
    CHECK(random_init(spec, 11) == a);
    CHECK(random_init(spec, 12) != a);
    CHECK(validate_weights(spec, a).ok());
    CHECK(total_elements(a) == count_params(spec));
    for (const auto& [name, t] : a)
        if (name.ends_with(".bn_scale"))
            for (float v : t.data) CHECK(v == 1.0f);
}

TEST_CASE("embedding files round-trip in binary and CSV") {
    EmbeddingFile f;
    f.selector = "M_B+L";
    f.dim = 3;
    f.values = {1.0f, -2.5f, 3.14159274f, 1e-20f, 0.0f, -1e30f};
    SUBCASE("scene") {}
    SUBCASE("timestamps") { f.timestamps = {0.08, 0.13}; }
    CHECK(decode_embeddings(encode_embeddings(f)) == f);
    const auto csv = embeddings_to_csv(f);
    CHECK(embeddings_from_csv(csv, f.selector) == f);

    const auto path = std::filesystem::temp_directory_path() / "gpae_emb.gpav";
    save_embeddings(path, f);
    CHECK(load_embeddings(path) == f);
    std::filesystem::remove(path);

    auto bytes = encode_embeddings(f);
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_embeddings(bytes), FormatError);
    bytes = encode_embeddings(f);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_embeddings(bytes), FormatError);
}

TEST_CASE("missing files are io errors") {
    try {
        load_model("/nonexistent/dir/model.gpae");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
}
