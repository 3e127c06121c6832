#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gpae {

enum class TaskType { multiclass, multilabel };
enum class Metric { accuracy, mean_average_precision };

std::string_view to_string(TaskType type);
std::string_view to_string(Metric metric);
TaskType parse_task_type(std::string_view text);
Metric parse_metric(std::string_view text);

struct ProbeSplit {
    std::vector<std::vector<float>> x;
    // Class indices per example: exactly one for multiclass, any number for
    // multilabel.
    std::vector<std::vector<int>> labels;

    std::size_t size() const { return x.size(); }
};

struct ProbeTask {
    std::string name;
    TaskType task_type = TaskType::multiclass;
    Metric metric = Metric::accuracy;
    std::string group = "general";
    int n_classes = 0;
    ProbeSplit train;
    std::optional<ProbeSplit> valid;  // carved from train by seeded shuffle when absent
    std::optional<ProbeSplit> test;   // falls back to the validation split when absent
};

struct MlpConfig {
    int hidden_width = 512;
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double weight_init_scale = 1.0;
    int patience = 10;
    double valid_fraction = 0.2;
    bool standardize = true;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// One-hidden-layer MLP (ReLU hidden) with a softmax or sigmoid head. All
// parameters live in one flat vector: W1 [hidden, in], b1, W2 [out, hidden], b2.
class Mlp {
public:
    Mlp() = default;
    Mlp(int inputs, int hidden, int outputs, TaskType head);

    void init_uniform(double scale, std::uint64_t seed);

    int inputs() const { return inputs_; }
    int hidden() const { return hidden_; }
    int outputs() const { return outputs_; }
    TaskType head() const { return head_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> logits(std::span<const double> x) const;
    // Softmax probabilities (multiclass) or per-class sigmoids (multilabel).
    std::vector<double> scores(std::span<const double> x) const;

    // Mean loss over the batch (cross-entropy or summed-over-classes binary
    // cross-entropy); writes d(loss)/d(params) into grad.
    double loss_and_grad(std::span<const std::vector<double>> xs,
                         std::span<const std::vector<int>> labels, std::vector<double>& grad) const;
    double loss(std::span<const std::vector<double>> xs, std::span<const std::vector<int>> labels) const;

    std::size_t w1_offset() const { return 0; }
    std::size_t b1_offset() const { return static_cast<std::size_t>(hidden_ * inputs_); }
    std::size_t w2_offset() const { return b1_offset() + static_cast<std::size_t>(hidden_); }
    std::size_t b2_offset() const { return w2_offset() + static_cast<std::size_t>(outputs_ * hidden_); }

private:
    double forward_one(std::span<const double> x, std::span<const int> label,
                       std::vector<double>* grad, double weight) const;

    int inputs_ = 0;
    int hidden_ = 0;
    int outputs_ = 0;
    TaskType head_ = TaskType::multiclass;
    std::vector<double> params_;
};

struct TrainedProbe {
    Mlp model;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;
    double raw_score = 0.0;         // metric on the held-out split
    double validation_score = 0.0;  // best validation metric during training
    int epochs_run = 0;

    std::vector<double> predict(std::span<const float> x) const;
};

// Trains with mini-batch Adam and early stopping on the validation metric.
// Deterministic for a given seed. Throws invalid_task on degenerate tasks.
TrainedProbe train_probe(const ProbeTask& task, const MlpConfig& cfg);

// Max relative error between analytic and central-difference (h = 1e-4)
// gradients of a tiny inputs-hidden-outputs MLP on random data.
double gradient_check(const MlpConfig& cfg, TaskType head, int inputs = 3, int outputs = 2);

double accuracy(std::span<const std::vector<double>> scores, std::span<const std::vector<int>> labels);

// Mean over classes of rank-based average precision; classes without
// positives are skipped. scores and truth are [examples][classes], truth 0/1.
double compute_map(std::span<const std::vector<double>> scores,
                   std::span<const std::vector<int>> truth);

struct TaskScore {
    double raw = 0.0;
    double reference_best = 0.0;
    double normalized = 0.0;
    std::string group;
};

struct ScoreTable {
    std::map<std::string, TaskScore> per_task;
    std::map<std::string, double> group_means;
    double overall_mean = 0.0;
};

// normalized = 100 * raw / reference; overall mean is the unweighted mean over
// tasks. Tasks without a group entry count only toward the overall mean.
ScoreTable normalize_scores(const std::map<std::string, double>& raw,
                            const std::map<std::string, double>& reference,
                            const std::map<std::string, std::string>& groups);

struct ReferenceEntry {
    double reference_best = 0.0;
    std::string group;
};

// Lines of "<task> <reference_best> <group>"; '#' starts a comment.
std::map<std::string, ReferenceEntry> parse_reference_config(std::string_view text);
std::map<std::string, ReferenceEntry> load_reference_config(const std::filesystem::path& path);

// Task directory: task.json ({"task_type", "metric", "n_classes"}), plus
// train/valid/test as <split>.emb (embedding file) and <split>.labels (one
// line of whitespace-separated class indices per row). valid and test are
// optional.
ProbeTask load_probe_task(const std::filesystem::path& dir);
void save_probe_task(const ProbeTask& task, const std::filesystem::path& dir);

}  // namespace gpae
