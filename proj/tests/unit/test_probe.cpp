#include "gpae/error.hpp"
#include "gpae/probe.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace gpae;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::structural;
}

ProbeSplit blobs(std::size_t n, std::uint64_t seed, double sep = 3.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, 1.0f);
    ProbeSplit s;
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i % 2);
        const float off = cls ? static_cast<float>(sep) : -static_cast<float>(sep);
        s.x.push_back({d(rng) + off, d(rng) - off, d(rng)});
        s.labels.push_back({cls});
    }
    return s;
}

// Classic perceptron with bias; returns accuracy on the evaluation split.
double perceptron_accuracy(const ProbeSplit& train, const ProbeSplit& test) {
    const std::size_t d = train.x.front().size();
    std::vector<double> w(d + 1, 0.0);
    auto score = [&](const std::vector<float>& x) {
        double s = w[d];
        for (std::size_t i = 0; i < d; ++i) s += w[i] * x[i];
        return s;
    };
    for (int epoch = 0; epoch < 100; ++epoch)
        for (std::size_t k = 0; k < train.size(); ++k) {
            const double y = train.labels[k][0] ? 1.0 : -1.0;
            if (y * score(train.x[k]) <= 0) {
                for (std::size_t i = 0; i < d; ++i) w[i] += y * train.x[k][i];
                w[d] += y;
            }
        }
    std::size_t ok = 0;
    for (std::size_t k = 0; k < test.size(); ++k) ok += (score(test.x[k]) > 0) == (test.labels[k][0] == 1);
    return static_cast<double>(ok) / test.size();
}

ProbeTask xor_task() {
    ProbeTask t;
    t.name = "xor";
    t.n_classes = 2;
    t.train.x = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    t.train.labels = {{0}, {1}, {1}, {0}};
    t.valid = t.train;
    t.test = t.train;
    return t;
}

}  // namespace

TEST_CASE("analytic gradients agree with central differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        MlpConfig cfg;
        cfg.hidden_width = 4;
        cfg.seed = seed;
        CAPTURE(seed);
        CHECK(gradient_check(cfg, TaskType::multiclass, 3, 2) < 1e-4);
        CHECK(gradient_check(cfg, TaskType::multilabel, 3, 2) < 1e-4);
    }
    MlpConfig big;
    big.hidden_width = 20;
    CHECK(kind_of([&] { gradient_check(big, TaskType::multiclass); }) == ErrorKind::invalid_config);
}

TEST_CASE("at the origin the output-bias gradient is softmax(0) minus one-hot") {
    for (int classes : {2, 3, 5}) {
        Mlp m(3, 4, classes, TaskType::multiclass);
        std::fill(m.params().begin(), m.params().end(), 0.0);
        const std::vector<std::vector<double>> xs{{0, 0, 0}};
        const std::vector<std::vector<int>> ys{{1}};
        std::vector<double> grad;
        const double loss = m.loss_and_grad(xs, ys, grad);
        CHECK(loss == doctest::Approx(std::log(classes)));
        for (int c = 0; c < classes; ++c)
            CHECK(grad[m.b2_offset() + c] == doctest::Approx(1.0 / classes - (c == 1 ? 1.0 : 0.0)));
        for (std::size_t i = 0; i < m.b2_offset(); ++i) CHECK(grad[i] == 0.0);
    }
}

TEST_CASE("XOR is learned exactly") {
    MlpConfig cfg;
    cfg.hidden_width = 8;
    cfg.learning_rate = 0.05;
    cfg.epochs = 2000;
    cfg.patience = 2000;
    cfg.batch_size = 4;
    cfg.standardize = false;
    cfg.seed = 3;
    const auto probe = train_probe(xor_task(), cfg);
    CHECK(probe.raw_score == 1.0);
    const auto t = xor_task();
    for (std::size_t i = 0; i < 4; ++i) {
        const auto s = probe.predict(t.train.x[i]);
        CHECK((s[1] > s[0]) == (t.train.labels[i][0] == 1));
    }
}

TEST_CASE("degenerate tasks are rejected") {
    ProbeTask t;
    t.name = "same";
    t.n_classes = 2;
    t.train.x = {{1}, {2}, {3}};
    t.train.labels = {{0}, {0}, {0}};
    CHECK(kind_of([&] { train_probe(t, {}); }) == ErrorKind::invalid_task);
    t.n_classes = 1;
    CHECK(kind_of([&] { train_probe(t, {}); }) == ErrorKind::invalid_task);
    t.n_classes = 2;
    t.train.labels = {{0}, {1}, {2}};
    CHECK(kind_of([&] { train_probe(t, {}); }) == ErrorKind::invalid_task);
}

TEST_CASE("separable blobs are classified as well as a perceptron manages") {
    ProbeTask t;
    t.name = "blobs";
    t.n_classes = 2;
    t.train = blobs(200, 1);
    t.test = blobs(200, 2);
    MlpConfig cfg;
    cfg.hidden_width = 32;
    cfg.seed = 5;
    const auto probe = train_probe(t, cfg);
    const double oracle = perceptron_accuracy(t.train, *t.test);
    CHECK(oracle >= 0.95);
    CHECK(probe.raw_score >= 0.95);
    CHECK(probe.raw_score >= oracle - 0.02);
}

TEST_CASE("training is bit-reproducible for a seed") {
    ProbeTask t;
    t.name = "blobs";
    t.n_classes = 2;
    t.train = blobs(120, 7, 1.0);
    MlpConfig cfg;
    cfg.hidden_width = 16;
    cfg.epochs = 30;
    cfg.seed = 42;
    const auto a = train_probe(t, cfg);
    const auto b = train_probe(t, cfg);
    CHECK(a.model.params() == b.model.params());
    CHECK(a.raw_score == b.raw_score);
    CHECK(a.epochs_run == b.epochs_run);
    cfg.seed = 43;
    CHECK(train_probe(t, cfg).model.params() != a.model.params());
}

TEST_CASE("multilabel probe trains under mAP") {
    ProbeTask t;
    t.name = "tags";
    t.task_type = TaskType::multilabel;
    t.metric = Metric::mean_average_precision;
    t.n_classes = 3;
    std::mt19937_64 rng(9);
    std::normal_distribution<float> d(0.0f, 0.3f);
    for (int i = 0; i < 240; ++i) {
        std::vector<float> x(3);
        std::vector<int> y;
        for (int c = 0; c < 3; ++c) {
            const bool on = (rng() & 1) != 0;
            x[c] = (on ? 1.0f : -1.0f) + d(rng);
            if (on) y.push_back(c);
        }
        t.train.x.push_back(x);
        t.train.labels.push_back(y);
    }
    MlpConfig cfg;
    cfg.hidden_width = 16;
    const auto probe = train_probe(t, cfg);
    CHECK(probe.raw_score > 0.95);
}

TEST_CASE("average precision examples") {
    using V = std::vector<std::vector<double>>;
    using I = std::vector<std::vector<int>>;
    CHECK(compute_map(V{{0.9}, {0.8}, {0.1}}, I{{1}, {0}, {1}}) == doctest::Approx(0.8333333333));
    CHECK(compute_map(V{{0.9, 0.1}, {0.2, 0.8}, {0.1, 0.3}}, I{{1, 0}, {0, 1}, {0, 0}}) == 1.0);
    for (int n : {2, 5, 10}) {
        V s;
        I truth;
        for (int i = 0; i < n; ++i) {
            s.push_back({static_cast<double>(n - i)});
            truth.push_back({i == n - 1 ? 1 : 0});
        }
        CHECK(compute_map(s, truth) == doctest::Approx(1.0 / n));
    }
    // Class 1 has no positives and is skipped.
    CHECK(compute_map(V{{0.9, 0.5}, {0.1, 0.2}}, I{{1, 0}, {0, 0}}) == 1.0);
    // Ties keep index order.
    CHECK(compute_map(V{{0.5}, {0.5}}, I{{0}, {1}}) == doctest::Approx(0.5));
}

TEST_CASE("average precision ignores strictly monotone score transforms") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<std::vector<double>> s(50, std::vector<double>(4));
    std::vector<std::vector<int>> truth(50, std::vector<int>(4));
    for (int i = 0; i < 50; ++i)
        for (int c = 0; c < 4; ++c) {
            s[i][c] = u(rng);
            truth[i][c] = (rng() % 3) == 0;
        }
    auto t = s;
    for (auto& row : t)
        for (double& v : row) v = std::exp(3 * v) + 7;
    CHECK(compute_map(s, truth) == compute_map(t, truth));
}

TEST_CASE("score normalization") {
    CHECK(normalize_scores({{"a", 43.11}}, {{"a", 50.0}}, {}).per_task.at("a").normalized ==
          doctest::Approx(86.22));

    const auto same = normalize_scores({{"a", 0.3}, {"b", 0.9}}, {{"a", 0.3}, {"b", 0.9}},
                                       {{"a", "speech"}, {"b", "music"}});
    CHECK(same.overall_mean == doctest::Approx(100.0));
    CHECK(same.group_means.at("speech") == doctest::Approx(100.0));

    const auto three = normalize_scores({{"x", 55.64}, {"y", 88.28}, {"z", 43.12}},
                                        {{"x", 100}, {"y", 100}, {"z", 100}},
                                        {{"x", "speech"}, {"y", "music"}, {"z", "music"}});
    CHECK(std::round(three.overall_mean * 100) / 100 == doctest::Approx(62.35));
    CHECK(three.group_means.at("music") == doctest::Approx((88.28 + 43.12) / 2));

    const auto base = normalize_scores({{"a", 0.4}, {"b", 0.6}}, {{"a", 0.8}, {"b", 0.9}}, {});
    const auto scaled = normalize_scores({{"a", 0.4 * 37}, {"b", 0.6}}, {{"a", 0.8 * 37}, {"b", 0.9}}, {});
    CHECK(scaled.per_task.at("a").normalized == doctest::Approx(base.per_task.at("a").normalized));
    CHECK(scaled.overall_mean == doctest::Approx(base.overall_mean));

    CHECK(kind_of([] { normalize_scores({{"a", 1}}, {}, {}); }) == ErrorKind::configuration);
    CHECK(kind_of([] { normalize_scores({{"a", 1}}, {{"a", 0}}, {}); }) == ErrorKind::configuration);
    CHECK(kind_of([] { normalize_scores({{"a", 1}}, {{"a", -2}}, {}); }) == ErrorKind::configuration);
}

TEST_CASE("reference config parsing") {
    const auto ref = parse_reference_config("# task ref group\nesc50 0.9 general\n\nspeech_cmd 0.97 speech # tail\n");
    REQUIRE(ref.size() == 2);
    CHECK(ref.at("esc50").reference_best == 0.9);
    CHECK(ref.at("speech_cmd").group == "speech");
    CHECK_THROWS_AS(parse_reference_config("esc50 nope general\n"), Error);
    CHECK_THROWS_AS(parse_reference_config("esc50 0.9\n"), Error);
}

TEST_CASE("task directories round-trip") {
    ProbeTask t;
    t.name = "disk";
    t.task_type = TaskType::multilabel;
    t.metric = Metric::mean_average_precision;
    t.n_classes = 3;
    t.train.x = {{1.5f, 2.0f}, {-1.0f, 0.25f}};
    t.train.labels = {{0, 2}, {}};
    t.test = ProbeSplit{{{0.0f, 1.0f}}, {{1}}};
    const auto dir = std::filesystem::temp_directory_path() / "gpae_probe_task_rt";
    std::filesystem::remove_all(dir);
    save_probe_task(t, dir);
    const auto back = load_probe_task(dir);
    CHECK(back.name == "disk");
    CHECK(back.task_type == t.task_type);
    CHECK(back.metric == t.metric);
    CHECK(back.n_classes == 3);
    CHECK(back.train.x == t.train.x);
    CHECK(back.train.labels == t.train.labels);
    CHECK_FALSE(back.valid);
    REQUIRE(back.test);
    CHECK(back.test->labels == t.test->labels);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config validation") {
    MlpConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.hidden_width = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
