#include "gpae/clip_embedder.hpp"
#include "gpae/error.hpp"
#include "gpae/feature_taps.hpp"
#include "gpae/weights_io.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gpae;

namespace {

const Extractor& mn01() {
    static const Extractor model = [] {
        const auto spec = build_arch(0.1);
        return Extractor(Network(spec, random_init(spec, 77)));
    }();
    return model;
}

AudioClip noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, 0.1f);
    AudioClip c;
    c.samples.resize(n);
    for (float& v : c.samples) v = d(rng);
    return c;
}

AudioClip slice(const AudioClip& c, std::size_t begin, std::size_t len) {
    AudioClip out;
    out.samples.assign(len, 0.0f);
    for (std::size_t i = 0; i < len && begin + i < c.samples.size(); ++i) out.samples[i] = c.samples[begin + i];
    return out;
}

// Counts frame starts 0, L, 2L, ... that land inside the clip.
std::size_t enumerate_starts(std::size_t n, std::size_t len) {
    std::size_t count = 0;
    for (std::size_t start = 0; start < n; start += len) ++count;
    return std::max<std::size_t>(count, 1);
}

const FeatureSelector kSel = FeatureSelector::default_selector();

}  // namespace

TEST_CASE("a 30 s clip averages its three 10 s segments") {
    const auto clip = noise(30 * 32000, 1);
    const auto scene = scene_embedding(clip, mn01(), kSel);
    CHECK(scene.n_frames_averaged == 3);
    REQUIRE(scene.embedding.dim() == embedding_dim(0.1, kSel));
    std::vector<double> manual(scene.embedding.dim(), 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto e = mn01().embed(slice(clip, k * 320000, 320000), kSel);
        for (std::size_t i = 0; i < e.dim(); ++i) manual[i] += e.values[i] / 3.0;
    }
    for (std::size_t i = 0; i < manual.size(); ++i)
        CHECK(std::abs(scene.embedding.values[i] - manual[i]) <= 1e-6 * std::max(1.0, std::abs(manual[i])));
}

TEST_CASE("a 7 s clip is one zero-padded frame") {
    const auto clip = noise(7 * 32000, 2);
    const auto scene = scene_embedding(clip, mn01(), kSel);
    CHECK(scene.n_frames_averaged == 1);
    CHECK(scene.embedding.values == mn01().embed(slice(clip, 0, 320000), kSel).values);
}

TEST_CASE("scene frame counts match a frame-splitting oracle from 1 to 40 s") {
    const FeatureSelector low = FeatureSelector::parse("L");
    for (std::size_t s = 1; s <= 40; ++s) {
        CAPTURE(s);
        const std::size_t n = s * 32000;
        CHECK(scene_frame_count(n, 320000) == enumerate_starts(n, 320000));
        CHECK(scene_embedding(noise(n, s), mn01(), low).n_frames_averaged == enumerate_starts(n, 320000));
    }
    CHECK(scene_frame_count(25 * 32000, 320000) == 3);
    CHECK(scene_frame_count(320001, 320000) == 2);
    CHECK(scene_frame_count(1, 320000) == 1);
}

TEST_CASE("identical 10 s frames give the single-frame embedding") {
    const auto frame = noise(320000, 3);
    AudioClip clip;
    for (int k = 0; k < 3; ++k) clip.samples.insert(clip.samples.end(), frame.samples.begin(), frame.samples.end());
    const auto scene = scene_embedding(clip, mn01(), kSel);
    const auto one = mn01().embed(frame, kSel);
    for (std::size_t i = 0; i < one.dim(); ++i)
        CHECK(scene.embedding.values[i] == doctest::Approx(one.values[i]).epsilon(1e-6));
}

TEST_CASE("one second yields 17 windows centered every 50 ms") {
    const auto clip = noise(32000, 4);
    const auto ts = timestamp_embeddings(clip, mn01(), kSel);
    REQUIRE(ts.timestamps_s.size() == 17);
    REQUIRE(ts.embeddings.size() == 17);
    // Enumerate window starts directly.
    std::size_t i = 0;
    for (std::size_t start = 0; start + 5120 <= 32000; start += 1600, ++i) {
        CHECK(ts.timestamps_s[i] == doctest::Approx((start + 2560) / 32000.0).epsilon(1e-12));
        CHECK(ts.embeddings[i].values == mn01().embed(slice(clip, start, 5120), kSel).values);
        CHECK(ts.embeddings[i].dim() == embedding_dim(0.1, kSel));
    }
    CHECK(i == 17);
    CHECK(ts.timestamps_s.front() == doctest::Approx(0.080));
    CHECK(ts.timestamps_s.back() == doctest::Approx(0.880));
    for (std::size_t k = 1; k < ts.timestamps_s.size(); ++k)
        CHECK(ts.timestamps_s[k] - ts.timestamps_s[k - 1] == doctest::Approx(0.050).epsilon(1e-9));
}

TEST_CASE("160 ms and shorter clips yield a single window") {
    for (std::size_t n : {5120u, 5121u, 6719u, 3000u, 1u}) {
        CAPTURE(n);
        const auto ts = timestamp_embeddings(noise(n, 5), mn01(), kSel);
        REQUIRE(ts.timestamps_s.size() == 1);
        CHECK(ts.timestamps_s[0] == doctest::Approx(0.080));
    }
    CHECK(timestamp_window_count(6720, 5120, 1600) == 2);
}

TEST_CASE("threaded evaluation is bit-identical to sequential") {
    const auto clip = noise(21 * 32000, 6);
    const auto seq = scene_embedding(clip, mn01(), kSel, {1});
    const auto par = scene_embedding(clip, mn01(), kSel, {3});
    CHECK(seq.embedding.values == par.embedding.values);

    const auto short_clip = noise(16000, 7);
    const auto ts1 = timestamp_embeddings(short_clip, mn01(), kSel, {1});
    const auto ts4 = timestamp_embeddings(short_clip, mn01(), kSel, {4});
    CHECK(ts1.timestamps_s == ts4.timestamps_s);
    for (std::size_t i = 0; i < ts1.embeddings.size(); ++i) CHECK(ts1.embeddings[i].values == ts4.embeddings[i].values);
}

TEST_CASE("invalid clips") {
    AudioClip empty;
    CHECK_THROWS_AS(scene_embedding(empty, mn01(), kSel), Error);
    CHECK_THROWS_AS(timestamp_embeddings(empty, mn01(), kSel), Error);
    auto wrong_rate = noise(16000, 8);
    wrong_rate.sample_rate_hz = 16000;
    try {
        scene_embedding(wrong_rate, mn01(), kSel);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unsupported_rate);
    }
}
