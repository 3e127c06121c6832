#include "gpae/clip_embedder.hpp"
#include "gpae/complexity.hpp"
#include "gpae/mel_frontend.hpp"
#include "gpae/weights_io.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

gpae::AudioClip noise_clip(double seconds) {
    std::mt19937_64 rng(1);
    std::normal_distribution<float> d(0.0f, 0.1f);
    gpae::AudioClip clip;
    clip.samples.resize(static_cast<std::size_t>(seconds * 32000));
    for (float& v : clip.samples) v = d(rng);
    return clip;
}

void BM_Melspec10s(benchmark::State& state) {
    const gpae::MelFrontend frontend;
    const auto clip = noise_clip(10.0);
    for (auto _ : state) benchmark::DoNotOptimize(frontend.compute(clip));
}
BENCHMARK(BM_Melspec10s)->Unit(benchmark::kMillisecond);

// arg: alpha x 10
void BM_Forward10s(benchmark::State& state) {
    const double alpha = static_cast<double>(state.range(0)) / 10.0;
    const auto spec = gpae::build_arch(alpha);
    const gpae::Network net(spec, gpae::random_init(spec, 1));
    const auto mel = gpae::compute_melspec(noise_clip(10.0), {});
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(mel));
    state.counters["MACs"] = static_cast<double>(gpae::count_macs(spec));
}
BENCHMARK(BM_Forward10s)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SceneEmbedding30s(benchmark::State& state) {
    const auto spec = gpae::build_arch(0.1);
    const gpae::Extractor model(gpae::Network(spec, gpae::random_init(spec, 1)));
    const auto clip = noise_clip(30.0);
    const auto sel = gpae::FeatureSelector::default_selector();
    for (auto _ : state) benchmark::DoNotOptimize(gpae::scene_embedding(clip, model, sel));
}
BENCHMARK(BM_SceneEmbedding30s)->Unit(benchmark::kMillisecond);

void BM_CountMacs(benchmark::State& state) {
    const auto spec = gpae::build_arch(4.0);
    for (auto _ : state) benchmark::DoNotOptimize(gpae::count_macs(spec));
}
BENCHMARK(BM_CountMacs);

}  // namespace
BENCHMARK_MAIN();
