#include "cli.hpp"

#include "gpae/audio_io.hpp"
#include "gpae/clip_embedder.hpp"
#include "gpae/complexity.hpp"
#include "gpae/error.hpp"
#include "gpae/feature_taps.hpp"
#include "gpae/parallel.hpp"
#include "gpae/probe.hpp"
#include "gpae/weights_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace gpae::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelSource {
    std::string model_path;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

struct EmbedArgs {
    ModelSource source;
    std::string features = "M_B+L";
    std::string out;
    std::string format = "binary";
    std::vector<std::string> inputs;
};

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GPAE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw UsageError("GPAE_THREADS must be a positive integer, got '" + std::string(env) + "'");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

ModelFile resolve_model(const ModelSource& src, bool alpha_given) {
    if (!src.model_path.empty()) return load_model(src.model_path);
    if (!alpha_given) throw UsageError("one of --model or --alpha is required");
    return make_random_model(src.alpha, src.seed);
}

FeatureSelector parse_selector_flag(const std::string& text) {
    try {
        return FeatureSelector::parse(text);
    } catch (const Error& e) {
        throw UsageError(std::string("--features: ") + e.what());
    }
}

AudioClip load_audio(const std::string& path, int rate) {
    return resample_linear(read_wav(path), rate);
}

void write_embeddings(const EmbeddingFile& file, const EmbedArgs& args) {
    if (args.format == "csv") {
        const std::string csv = embeddings_to_csv(file);
        write_file(args.out, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
    } else {
        save_embeddings(args.out, file);
    }
}

void add_embed_options(CLI::App* cmd, EmbedArgs& args, bool& alpha_given) {
    auto* model = cmd->add_option("--model", args.source.model_path, "Model file (.gpae)");
    auto* alpha = cmd->add_option("--alpha", args.source.alpha, "Width multiplier; uses random weights")
                      ->check(CLI::Range(1e-6, 8.0));
    model->excludes(alpha);
    alpha->excludes(model);
    alpha->each([&](const std::string&) { alpha_given = true; });
    cmd->add_option("--seed", args.source.seed, "Seed for random weights");
    cmd->add_option("--features", args.features, "Feature selector, e.g. M_B+L");
    cmd->add_option("--out", args.out, "Output file")->required();
    cmd->add_option("--format", args.format, "binary or csv")
        ->check(CLI::IsMember({"binary", "csv"}));
}

int cmd_embed(const EmbedArgs& args, bool alpha_given, std::ostream& out) {
    if (args.inputs.empty()) throw UsageError("embed: at least one input WAV file is required");
    const auto selector = parse_selector_flag(args.features);
    const ModelFile model = resolve_model(args.source, alpha_given);
    const Extractor extractor(make_network(model), model.config.frontend);
    const unsigned threads = worker_threads();

    std::vector<SceneEmbedding> scenes(args.inputs.size());
    detail::parallel_for(args.inputs.size(), threads, [&](std::size_t i) {
        const AudioClip clip = load_audio(args.inputs[i], model.config.frontend.sample_rate_hz);
        scenes[i] = scene_embedding(clip, extractor, selector);
    });

    EmbeddingFile file;
    file.selector = selector.to_string();
    file.dim = static_cast<std::uint32_t>(embedding_dim(model.config.arch, selector));
    for (const auto& s : scenes) file.values.insert(file.values.end(), s.embedding.values.begin(), s.embedding.values.end());
    write_embeddings(file, args);
    out << "wrote " << file.count() << " scene embedding(s) of dim " << file.dim << " to " << args.out << '\n';
    return kOk;
}

int cmd_timestamps(const EmbedArgs& args, bool alpha_given, std::ostream& out) {
    if (args.inputs.size() != 1) throw UsageError("timestamps: exactly one input WAV file is required");
    const auto selector = parse_selector_flag(args.features);
    const ModelFile model = resolve_model(args.source, alpha_given);
    const Extractor extractor(make_network(model), model.config.frontend);
    const AudioClip clip = load_audio(args.inputs.front(), model.config.frontend.sample_rate_hz);
    const auto ts = timestamp_embeddings(clip, extractor, selector, {worker_threads()});

    EmbeddingFile file;
    file.selector = selector.to_string();
    file.dim = static_cast<std::uint32_t>(embedding_dim(model.config.arch, selector));
    file.timestamps = ts.timestamps_s;
    for (const auto& e : ts.embeddings) file.values.insert(file.values.end(), e.values.begin(), e.values.end());
    write_embeddings(file, args);
    out << "wrote " << file.count() << " timestamp embedding(s) of dim " << file.dim << " to " << args.out << '\n';
    return kOk;
}

int cmd_complexity(double alpha, double seconds, bool per_layer, bool as_json, std::ostream& out) {
    const auto spec = build_arch(alpha);
    const auto n_samples = static_cast<std::size_t>(std::llround(seconds * 32000.0));
    const std::size_t frames = frame_count(n_samples, 320);
    const auto report = complexity_report(spec, frames);
    if (as_json) {
        json j{{"alpha", alpha},
               {"seconds", seconds},
               {"input_frames", frames},
               {"total_params", report.total_params},
               {"total_macs", report.total_macs}};
        if (per_layer) {
            json layers = json::array();
            for (const auto& l : report.per_layer)
                layers.push_back({{"name", l.name}, {"params", l.params}, {"macs", l.macs}});
            j["per_layer"] = layers;
        }
        out << j.dump(2) << '\n';
        return kOk;
    }
    out << "alpha          " << alpha << '\n'
        << "input frames   " << frames << " (" << seconds << " s)\n"
        << "total params   " << report.total_params << " (" << std::fixed << std::setprecision(3)
        << report.total_params / 1e6 << "M)\n"
        << "total MACs     " << report.total_macs << " (" << report.total_macs / 1e6 << "M)\n";
    out.unsetf(std::ios::fixed);
    if (per_layer) {
        out << '\n' << std::left << std::setw(18) << "layer" << std::right << std::setw(12) << "params"
            << std::setw(16) << "MACs" << '\n';
        for (const auto& l : report.per_layer)
            out << std::left << std::setw(18) << l.name << std::right << std::setw(12) << l.params
                << std::setw(16) << l.macs << '\n';
    }
    return kOk;
}

std::vector<fs::path> task_dirs(const fs::path& root) {
    if (fs::exists(root / "task.json")) return {root};
    if (!fs::is_directory(root)) throw Error(ErrorKind::io, "task directory " + root.string() + " does not exist");
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "task.json")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw Error(ErrorKind::io, "no task directories (with task.json) under " + root.string());
    return dirs;
}

int cmd_probe(const std::string& tasks_root, const std::string& reference_path, const MlpConfig& cfg,
              bool as_json, std::ostream& out) {
    const auto reference = load_reference_config(reference_path);
    const auto dirs = task_dirs(tasks_root);
    std::vector<ProbeTask> tasks;
    for (const auto& d : dirs) tasks.push_back(load_probe_task(d));
    for (const auto& t : tasks)
        if (!reference.contains(t.name))
            throw Error(ErrorKind::configuration,
                        reference_path + ": no reference score for task '" + t.name + "'");

    std::vector<double> raw(tasks.size());
    detail::parallel_for(tasks.size(), worker_threads(),
                         [&](std::size_t i) { raw[i] = train_probe(tasks[i], cfg).raw_score; });

    std::map<std::string, double> raw_map, ref_map;
    std::map<std::string, std::string> groups;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        raw_map[tasks[i].name] = raw[i];
        ref_map[tasks[i].name] = reference.at(tasks[i].name).reference_best;
        groups[tasks[i].name] = reference.at(tasks[i].name).group;
    }
    const auto table = normalize_scores(raw_map, ref_map, groups);

    if (as_json) {
        json j{{"overall_mean", table.overall_mean}, {"group_means", table.group_means}};
        json per = json::object();
        for (const auto& [name, s] : table.per_task)
            per[name] = {{"raw", s.raw}, {"reference_best", s.reference_best},
                         {"normalized", s.normalized}, {"group", s.group}};
        j["per_task"] = per;
        out << j.dump(2) << '\n';
        return kOk;
    }
    out << std::left << std::setw(24) << "task" << std::setw(10) << "group" << std::right << std::setw(12)
        << "raw" << std::setw(12) << "reference" << std::setw(12) << "normalized" << '\n'
        << std::fixed << std::setprecision(4);
    for (const auto& [name, s] : table.per_task)
        out << std::left << std::setw(24) << name << std::setw(10) << s.group << std::right << std::setw(12)
            << s.raw << std::setw(12) << s.reference_best << std::setw(12) << std::setprecision(2)
            << s.normalized << std::setprecision(4) << '\n';
    out << std::setprecision(2);
    for (const auto& [group, mean] : table.group_means) out << "group " << group << ": " << mean << '\n';
    out << "overall: " << table.overall_mean << '\n';
    return kOk;
}

int cmd_init(double alpha, std::uint64_t seed, const std::string& se_gate, const std::string& path,
             std::ostream& out) {
    ModelFile model = make_random_model(alpha, seed);
    model.config.net.se_gate = parse_se_gate(se_gate);
    save_model(path, model);
    out << "wrote random alpha=" << alpha << " model (" << total_elements(model.weights)
        << " parameters) to " << path << '\n';
    return kOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
    const ModelFile model = load_model(path);
    out << "config:\n" << json::parse(config_to_json(model.config)).dump(2) << "\n\n";
    out << "tensors: " << model.weights.size() << '\n';
    for (const auto& [name, t] : model.weights)
        out << "  " << std::left << std::setw(28) << name << std::setw(22) << shape_to_string(t.shape)
            << std::right << t.size() << '\n';
    out << "total elements: " << total_elements(model.weights) << '\n'
        << "count_params:   " << count_params(model.config.arch) << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"General-purpose audio embedding extractor"};
    app.require_subcommand(1);

    EmbedArgs embed_args;
    bool embed_alpha = false;
    auto* embed = app.add_subcommand("embed", "Scene embeddings, one per input WAV file");
    add_embed_options(embed, embed_args, embed_alpha);
    embed->add_option("inputs", embed_args.inputs, "Input WAV files");

    EmbedArgs ts_args;
    bool ts_alpha = false;
    auto* timestamps = app.add_subcommand("timestamps", "Timestamp embeddings every 50 ms");
    add_embed_options(timestamps, ts_args, ts_alpha);
    timestamps->add_option("inputs", ts_args.inputs, "Input WAV file");

    double cx_alpha = 1.0, cx_seconds = 10.0;
    bool cx_per_layer = false, cx_json = false;
    auto* complexity = app.add_subcommand("complexity", "Parameter and MAC counts");
    complexity->add_option("--alpha", cx_alpha, "Width multiplier")->required()->check(CLI::Range(1e-6, 8.0));
    complexity->add_option("--seconds", cx_seconds, "Audio length")->check(CLI::PositiveNumber);
    complexity->add_flag("--per-layer", cx_per_layer, "List every layer");
    complexity->add_flag("--json", cx_json, "JSON output");

    std::string probe_tasks, probe_reference;
    MlpConfig probe_cfg;
    bool probe_json = false;
    auto* probe = app.add_subcommand("probe", "Train MLP probes on embedding tasks and score them");
    probe->add_option("--tasks", probe_tasks, "Task directory or directory of task directories")->required();
    probe->add_option("--reference", probe_reference, "Reference-score config")->required();
    probe->add_option("--hidden", probe_cfg.hidden_width)->check(CLI::PositiveNumber);
    probe->add_option("--epochs", probe_cfg.epochs)->check(CLI::PositiveNumber);
    probe->add_option("--lr", probe_cfg.learning_rate)->check(CLI::PositiveNumber);
    probe->add_option("--batch-size", probe_cfg.batch_size)->check(CLI::PositiveNumber);
    probe->add_option("--patience", probe_cfg.patience)->check(CLI::PositiveNumber);
    probe->add_option("--seed", probe_cfg.seed);
    probe->add_flag("--json", probe_json, "JSON output");

    double init_alpha = 1.0;
    std::uint64_t init_seed = 0;
    std::string init_out, init_gate = "hard_sigmoid";
    auto* init = app.add_subcommand("init-weights", "Write a randomly initialized model file");
    init->add_option("--alpha", init_alpha, "Width multiplier")->required()->check(CLI::Range(1e-6, 8.0));
    init->add_option("--seed", init_seed, "Random seed");
    init->add_option("--se-gate", init_gate, "hard_sigmoid or sigmoid")
        ->check(CLI::IsMember({"hard_sigmoid", "sigmoid"}));
    init->add_option("--out", init_out, "Output model file")->required();

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Print a model file's config and tensor table");
    inspect->add_option("model", inspect_path, "Model file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        if (*embed) return cmd_embed(embed_args, embed_alpha, out);
        if (*timestamps) return cmd_timestamps(ts_args, ts_alpha, out);
        if (*complexity) return cmd_complexity(cx_alpha, cx_seconds, cx_per_layer, cx_json, out);
        if (*probe) return cmd_probe(probe_tasks, probe_reference, probe_cfg, probe_json, out);
        if (*init) return cmd_init(init_alpha, init_seed, init_gate, init_out, out);
        if (*inspect) return cmd_inspect(inspect_path, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return e.kind() == ErrorKind::numeric_failure ? kNumericFailure : kDataError;
    } catch (const fs::filesystem_error& e) {
        err << "error (io): " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace gpae::cli
