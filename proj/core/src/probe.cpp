#include "gpae/probe.hpp"

#include "gpae/error.hpp"
#include "gpae/weights_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace gpae {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with our own index draw so the order is identical across
// standard library implementations.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<std::vector<int>> to_binary(std::span<const std::vector<int>> labels, int n_classes) {
    std::vector<std::vector<int>> out(labels.size(), std::vector<int>(n_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (int c : labels[i]) out[i][c] = 1;
    return out;
}

void check_split(const ProbeSplit& split, const ProbeTask& task, std::size_t dim,
                 const std::string& which) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::invalid_task, "task '" + task.name + "' " + which + " split: " + what);
    };
    if (split.x.size() != split.labels.size()) fail("embedding and label counts differ");
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split.x[i].size() != dim) fail("embedding widths differ");
        const auto& l = split.labels[i];
        if (task.task_type == TaskType::multiclass && l.size() != 1)
            fail("multiclass examples need exactly one label");
        for (int c : l)
            if (c < 0 || c >= task.n_classes) fail("label " + std::to_string(c) + " outside class range");
    }
}

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    std::vector<double> apply(std::span<const float> x) const {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / scale[i];
        return out;
    }
};

Standardizer fit_standardizer(const ProbeSplit& train, std::size_t dim, bool enabled) {
    Standardizer s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
    if (!enabled) return s;
    const auto n = static_cast<double>(train.size());
    for (const auto& x : train.x)
        for (std::size_t i = 0; i < dim; ++i) s.mean[i] += x[i] / n;
    std::vector<double> var(dim, 0.0);
    for (const auto& x : train.x)
        for (std::size_t i = 0; i < dim; ++i) var[i] += (x[i] - s.mean[i]) * (x[i] - s.mean[i]) / n;
    for (std::size_t i = 0; i < dim; ++i) s.scale[i] = var[i] > 1e-12 ? std::sqrt(var[i]) : 1.0;
    return s;
}

double evaluate(const Mlp& model, const std::vector<std::vector<double>>& xs,
                const std::vector<std::vector<int>>& labels, Metric metric, int n_classes) {
    std::vector<std::vector<double>> scores;
    scores.reserve(xs.size());
    for (const auto& x : xs) scores.push_back(model.scores(x));
    if (metric == Metric::accuracy) return accuracy(scores, labels);
    return compute_map(scores, to_binary(labels, n_classes));
}

std::vector<int> parse_label_line(const std::string& line, std::size_t line_no,
                                  const std::filesystem::path& path) {
    std::istringstream is(line);
    std::vector<int> out;
    std::string tok;
    while (is >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_input, path.string() + ":" + std::to_string(line_no) +
                                                      ": bad label '" + tok + "'");
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(TaskType type) {
    return type == TaskType::multiclass ? "multiclass" : "multilabel";
}

std::string_view to_string(Metric metric) {
    return metric == Metric::accuracy ? "accuracy" : "mAP";
}

TaskType parse_task_type(std::string_view text) {
    if (text == "multiclass") return TaskType::multiclass;
    if (text == "multilabel") return TaskType::multilabel;
    throw Error(ErrorKind::configuration, "unknown task type '" + std::string(text) + "'");
}

Metric parse_metric(std::string_view text) {
    if (text == "accuracy") return Metric::accuracy;
    if (text == "mAP" || text == "map") return Metric::mean_average_precision;
    throw Error(ErrorKind::configuration, "unknown metric '" + std::string(text) + "'");
}

void MlpConfig::validate() const {
    if (hidden_width <= 0 || !(learning_rate > 0) || epochs <= 0 || batch_size <= 0 ||
        !(weight_init_scale > 0) || patience <= 0 || !(valid_fraction > 0 && valid_fraction < 1))
        throw Error(ErrorKind::invalid_config, "MLP config values must all be positive");
}

Mlp::Mlp(int inputs, int hidden, int outputs, TaskType head)
    : inputs_(inputs), hidden_(hidden), outputs_(outputs), head_(head),
      params_(static_cast<std::size_t>(hidden * inputs + hidden + outputs * hidden + outputs), 0.0) {}

void Mlp::init_uniform(double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    const double a1 = scale / std::sqrt(static_cast<double>(inputs_));
    const double a2 = scale / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t i = w1_offset(); i < b1_offset(); ++i) params_[i] = (2 * uniform01(rng) - 1) * a1;
    for (std::size_t i = w2_offset(); i < b2_offset(); ++i) params_[i] = (2 * uniform01(rng) - 1) * a2;
}

std::vector<double> Mlp::logits(std::span<const double> x) const {
    const double* w1 = params_.data() + w1_offset();
    const double* b1 = params_.data() + b1_offset();
    const double* w2 = params_.data() + w2_offset();
    const double* b2 = params_.data() + b2_offset();
    std::vector<double> h(hidden_);
    for (int j = 0; j < hidden_; ++j) {
        double a = b1[j];
        for (int i = 0; i < inputs_; ++i) a += w1[j * inputs_ + i] * x[i];
        h[j] = a > 0 ? a : 0;
    }
    std::vector<double> z(outputs_);
    for (int k = 0; k < outputs_; ++k) {
        double a = b2[k];
        for (int j = 0; j < hidden_; ++j) a += w2[k * hidden_ + j] * h[j];
        z[k] = a;
    }
    return z;
}

std::vector<double> Mlp::scores(std::span<const double> x) const {
    auto z = logits(x);
    if (head_ == TaskType::multilabel) {
        for (double& v : z) v = sigmoid(v);
        return z;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& v : z) total += (v = std::exp(v - m));
    for (double& v : z) v /= total;
    return z;
}

double Mlp::forward_one(std::span<const double> x, std::span<const int> label,
                        std::vector<double>* grad, double weight) const {
    const double* w1 = params_.data() + w1_offset();
    const double* b1 = params_.data() + b1_offset();
    const double* w2 = params_.data() + w2_offset();
    const double* b2 = params_.data() + b2_offset();

    std::vector<double> h(hidden_);
    for (int j = 0; j < hidden_; ++j) {
        double a = b1[j];
        for (int i = 0; i < inputs_; ++i) a += w1[j * inputs_ + i] * x[i];
        h[j] = a > 0 ? a : 0;
    }
    std::vector<double> z(outputs_);
    for (int k = 0; k < outputs_; ++k) {
        double a = b2[k];
        for (int j = 0; j < hidden_; ++j) a += w2[k * hidden_ + j] * h[j];
        z[k] = a;
    }

    std::vector<double> target(outputs_, 0.0);
    for (int c : label) target[c] = 1.0;

    double loss = 0.0;
    std::vector<double> dz(outputs_);
    if (head_ == TaskType::multiclass) {
        const double m = *std::max_element(z.begin(), z.end());
        double total = 0.0;
        for (int k = 0; k < outputs_; ++k) total += std::exp(z[k] - m);
        const double log_total = m + std::log(total);
        loss = log_total - z[label[0]];
        for (int k = 0; k < outputs_; ++k) dz[k] = std::exp(z[k] - log_total) - target[k];
    } else {
        for (int k = 0; k < outputs_; ++k) {
            loss += softplus(z[k]) - target[k] * z[k];
            dz[k] = sigmoid(z[k]) - target[k];
        }
    }
    if (!grad) return loss * weight;

    double* g = grad->data();
    std::vector<double> dh(hidden_, 0.0);
    for (int k = 0; k < outputs_; ++k) {
        const double d = dz[k] * weight;
        g[b2_offset() + k] += d;
        for (int j = 0; j < hidden_; ++j) {
            g[w2_offset() + k * hidden_ + j] += d * h[j];
            dh[j] += d * w2[k * hidden_ + j];
        }
    }
    for (int j = 0; j < hidden_; ++j) {
        if (h[j] <= 0) continue;
        g[b1_offset() + j] += dh[j];
        for (int i = 0; i < inputs_; ++i) g[w1_offset() + j * inputs_ + i] += dh[j] * x[i];
    }
    return loss * weight;
}

double Mlp::loss_and_grad(std::span<const std::vector<double>> xs,
                          std::span<const std::vector<int>> labels, std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    const double w = 1.0 / static_cast<double>(xs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) total += forward_one(xs[i], labels[i], &grad, w);
    return total;
}

double Mlp::loss(std::span<const std::vector<double>> xs, std::span<const std::vector<int>> labels) const {
    const double w = 1.0 / static_cast<double>(xs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) total += forward_one(xs[i], labels[i], nullptr, w);
    return total;
}

std::vector<double> TrainedProbe::predict(std::span<const float> x) const {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = (x[i] - feature_mean[i]) / feature_scale[i];
    return model.scores(v);
}

TrainedProbe train_probe(const ProbeTask& task, const MlpConfig& cfg) {
    cfg.validate();
    if (task.n_classes < 2)
        throw Error(ErrorKind::invalid_task, "task '" + task.name + "' needs at least two classes");
    if (task.train.size() == 0)
        throw Error(ErrorKind::invalid_task, "task '" + task.name + "' has no training examples");
    const std::size_t dim = task.train.x.front().size();
    if (dim == 0) throw Error(ErrorKind::invalid_task, "task '" + task.name + "' has empty embeddings");
    check_split(task.train, task, dim, "train");
    {
        std::set<std::vector<int>> patterns;
        for (auto l : task.train.labels) {
            std::sort(l.begin(), l.end());
            patterns.insert(l);
        }
        if (patterns.size() < 2)
            throw Error(ErrorKind::invalid_task,
                        "task '" + task.name + "' is degenerate: every training label is identical");
    }

    std::mt19937_64 rng(cfg.seed);
    ProbeSplit train;
    ProbeSplit valid;
    if (task.valid) {
        check_split(*task.valid, task, dim, "valid");
        train = task.train;
        valid = *task.valid;
    } else {
        if (task.train.size() < 2)
            throw Error(ErrorKind::invalid_task, "task '" + task.name + "' is too small to split");
        std::vector<std::size_t> idx(task.train.size());
        std::iota(idx.begin(), idx.end(), 0);
        shuffle_indices(idx, rng);
        const auto n_valid = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(cfg.valid_fraction * idx.size())), 1, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            ProbeSplit& dst = i < n_valid ? valid : train;
            dst.x.push_back(task.train.x[idx[i]]);
            dst.labels.push_back(task.train.labels[idx[i]]);
        }
    }
    if (task.test) check_split(*task.test, task, dim, "test");
    const ProbeSplit& held_out = task.test ? *task.test : valid;
    if (valid.size() == 0 || held_out.size() == 0)
        throw Error(ErrorKind::invalid_task, "task '" + task.name + "' has an empty evaluation split");

    const Standardizer norm = fit_standardizer(train, dim, cfg.standardize);
    auto prepare = [&](const ProbeSplit& s) {
        std::vector<std::vector<double>> out;
        out.reserve(s.size());
        for (const auto& x : s.x) out.push_back(norm.apply(x));
        return out;
    };
    const auto train_x = prepare(train);
    const auto valid_x = prepare(valid);
    const auto test_x = prepare(held_out);

    Mlp model(static_cast<int>(dim), cfg.hidden_width, task.n_classes, task.task_type);
    model.init_uniform(cfg.weight_init_scale, rng());

    const std::size_t n_params = model.params().size();
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0), grad;
    std::vector<double> best = model.params();
    double best_score = -std::numeric_limits<double>::infinity();
    int since_best = 0;
    int epochs_run = 0;
    long long step = 0;

    std::vector<std::size_t> order(train_x.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> bx;
    std::vector<std::vector<int>> by;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(order, rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            bx.clear();
            by.clear();
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(train_x[order[i]]);
                by.push_back(train.labels[order[i]]);
            }
            model.loss_and_grad(bx, by, grad);
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            auto& p = model.params();
            for (std::size_t i = 0; i < n_params; ++i) {
                m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * grad[i];
                v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * grad[i] * grad[i];
                p[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_eps);
            }
        }
        ++epochs_run;
        const double score = evaluate(model, valid_x, valid.labels, task.metric, task.n_classes);
        if (!std::isfinite(score))
            throw Error(ErrorKind::numeric_failure, "task '" + task.name + "': validation metric is not finite");
        if (score > best_score) {
            best_score = score;
            best = model.params();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    model.params() = best;

    TrainedProbe out;
    out.raw_score = evaluate(model, test_x, held_out.labels, task.metric, task.n_classes);
    out.validation_score = best_score;
    out.epochs_run = epochs_run;
    out.model = std::move(model);
    out.feature_mean = norm.mean;
    out.feature_scale = norm.scale;
    return out;
}

double gradient_check(const MlpConfig& cfg, TaskType head, int inputs, int outputs) {
    Mlp model(inputs, cfg.hidden_width, outputs, head);
    if (model.params().size() > 50)
        throw Error(ErrorKind::invalid_config, "gradient check is limited to networks of at most 50 parameters");
    std::mt19937_64 rng(cfg.seed);
    model.init_uniform(cfg.weight_init_scale, rng());
    for (std::size_t i = model.b1_offset(); i < model.w2_offset(); ++i) model.params()[i] = 2 * uniform01(rng) - 1;
    for (std::size_t i = model.b2_offset(); i < model.params().size(); ++i) model.params()[i] = 2 * uniform01(rng) - 1;

    constexpr int batch = 5;
    std::vector<std::vector<double>> xs(batch, std::vector<double>(inputs));
    std::vector<std::vector<int>> labels(batch);
    for (int b = 0; b < batch; ++b) {
        for (double& x : xs[b]) x = 4 * uniform01(rng) - 2;
        if (head == TaskType::multiclass) {
            labels[b] = {static_cast<int>(rng() % static_cast<std::uint64_t>(outputs))};
        } else {
            for (int c = 0; c < outputs; ++c)
                if (rng() & 1) labels[b].push_back(c);
        }
    }

    std::vector<double> analytic;
    model.loss_and_grad(xs, labels, analytic);
    constexpr double h = 1e-4;
    double worst = 0.0;
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        const double orig = model.params()[i];
        model.params()[i] = orig + h;
        const double up = model.loss(xs, labels);
        model.params()[i] = orig - h;
        const double down = model.loss(xs, labels);
        model.params()[i] = orig;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

double accuracy(std::span<const std::vector<double>> scores, std::span<const std::vector<int>> labels) {
    if (scores.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto best = std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin();
        correct += !labels[i].empty() && labels[i][0] == best;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double compute_map(std::span<const std::vector<double>> scores,
                   std::span<const std::vector<int>> truth) {
    if (scores.empty()) throw Error(ErrorKind::invalid_input, "mAP needs at least one example");
    const std::size_t n_classes = scores.front().size();
    double total = 0.0;
    std::size_t counted = 0;
    std::vector<std::size_t> order(scores.size());
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a][c] > scores[b][c]; });
        std::size_t hits = 0;
        double precision_sum = 0.0;
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            if (truth[order[rank]][c]) {
                ++hits;
                precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
            }
        }
        if (hits == 0) continue;
        total += precision_sum / static_cast<double>(hits);
        ++counted;
    }
    if (counted == 0) throw Error(ErrorKind::invalid_input, "mAP needs at least one positive label");
    return total / static_cast<double>(counted);
}

ScoreTable normalize_scores(const std::map<std::string, double>& raw,
                            const std::map<std::string, double>& reference,
                            const std::map<std::string, std::string>& groups) {
    ScoreTable table;
    std::map<std::string, std::pair<double, int>> group_acc;
    double total = 0.0;
    for (const auto& [task, score] : raw) {
        auto ref = reference.find(task);
        if (ref == reference.end())
            throw Error(ErrorKind::configuration, "no reference score for task '" + task + "'");
        if (!(ref->second > 0.0))
            throw Error(ErrorKind::configuration, "reference score for task '" + task + "' must be positive");
        TaskScore ts;
        ts.raw = score;
        ts.reference_best = ref->second;
        ts.normalized = 100.0 * score / ref->second;
        if (auto g = groups.find(task); g != groups.end()) {
            ts.group = g->second;
            auto& acc = group_acc[ts.group];
            acc.first += ts.normalized;
            acc.second += 1;
        }
        total += ts.normalized;
        table.per_task[task] = ts;
    }
    for (const auto& [group, acc] : group_acc) table.group_means[group] = acc.first / acc.second;
    table.overall_mean = raw.empty() ? 0.0 : total / static_cast<double>(raw.size());
    return table;
}

std::map<std::string, ReferenceEntry> parse_reference_config(std::string_view text) {
    std::map<std::string, ReferenceEntry> out;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string task, ref_text, group, extra;
        if (!(ls >> task)) continue;
        if (!(ls >> ref_text >> group) || (ls >> extra))
            throw Error(ErrorKind::configuration, "reference config line " + std::to_string(line_no) +
                                                      ": expected '<task> <reference_best> <group>'");
        double ref = 0.0;
        try {
            std::size_t used = 0;
            ref = std::stod(ref_text, &used);
            if (used != ref_text.size()) throw std::invalid_argument(ref_text);
        } catch (const std::exception&) {
            throw Error(ErrorKind::configuration, "reference config line " + std::to_string(line_no) +
                                                      ": bad reference score '" + ref_text + "'");
        }
        if (!(ref > 0.0))
            throw Error(ErrorKind::configuration, "reference config line " + std::to_string(line_no) +
                                                      ": reference score must be positive");
        if (!out.emplace(task, ReferenceEntry{ref, group}).second)
            throw Error(ErrorKind::configuration, "reference config lists task '" + task + "' twice");
    }
    return out;
}

std::map<std::string, ReferenceEntry> load_reference_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open reference config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_reference_config(ss.str());
}

ProbeTask load_probe_task(const std::filesystem::path& dir) {
    const auto meta_path = dir / "task.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw Error(ErrorKind::io, "cannot open " + meta_path.string());
    ProbeTask task;
    task.name = dir.filename().string();
    try {
        const auto meta = nlohmann::json::parse(meta_in);
        task.task_type = parse_task_type(meta.at("task_type").get<std::string>());
        task.metric = parse_metric(meta.at("metric").get<std::string>());
        task.n_classes = meta.at("n_classes").get<int>();
        if (meta.contains("name")) task.name = meta.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::configuration, meta_path.string() + ": " + e.what());
    }

    auto load_split = [&](const std::string& split) -> std::optional<ProbeSplit> {
        const auto emb_path = dir / (split + ".emb");
        const auto lab_path = dir / (split + ".labels");
        if (!std::filesystem::exists(emb_path)) return std::nullopt;
        const auto file = load_embeddings(emb_path);
        ProbeSplit out;
        for (std::size_t i = 0; i < file.count(); ++i) {
            auto row = file.row(i);
            out.x.emplace_back(row.begin(), row.end());
        }
        std::ifstream lin(lab_path);
        if (!lin) throw Error(ErrorKind::io, "cannot open " + lab_path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lin, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos && out.labels.size() >= out.x.size()) continue;
            out.labels.push_back(parse_label_line(line, line_no, lab_path));
        }
        if (out.labels.size() != out.x.size())
            throw Error(ErrorKind::invalid_input, lab_path.string() + ": " + std::to_string(out.labels.size()) +
                                                      " label rows for " + std::to_string(out.x.size()) + " embeddings");
        return out;
    };
    auto train = load_split("train");
    if (!train) throw Error(ErrorKind::io, "task directory " + dir.string() + " has no train.emb");
    task.train = std::move(*train);
    task.valid = load_split("valid");
    task.test = load_split("test");
    return task;
}

void save_probe_task(const ProbeTask& task, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json meta{{"name", task.name},
                        {"task_type", std::string(to_string(task.task_type))},
                        {"metric", std::string(to_string(task.metric))},
                        {"n_classes", task.n_classes}};
    std::ofstream(dir / "task.json") << meta.dump(2) << '\n';
    auto save_split = [&](const ProbeSplit& s, const std::string& split) {
        EmbeddingFile f;
        f.selector = "probe";
        f.dim = s.x.empty() ? 0 : static_cast<std::uint32_t>(s.x.front().size());
        for (const auto& x : s.x) f.values.insert(f.values.end(), x.begin(), x.end());
        save_embeddings(dir / (split + ".emb"), f);
        std::ofstream out(dir / (split + ".labels"));
        for (const auto& l : s.labels) {
            for (std::size_t i = 0; i < l.size(); ++i) out << (i ? " " : "") << l[i];
            out << '\n';
        }
    };
    save_split(task.train, "train");
    if (task.valid) save_split(*task.valid, "valid");
    if (task.test) save_split(*task.test, "test");
}

}  // namespace gpae
