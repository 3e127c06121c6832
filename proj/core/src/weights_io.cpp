#include "gpae/weights_io.hpp"

#include "gpae/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace gpae {

namespace {

using json = nlohmann::json;

constexpr char kModelMagic[4] = {'G', 'P', 'A', 'E'};
constexpr char kEmbeddingMagic[4] = {'G', 'P', 'A', 'V'};
constexpr std::uint32_t kMaxRank = 8;

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void string(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const std::string& what) const {
        if (remaining() < n)
            throw FormatError(pos_, "truncated " + what + ": need " + std::to_string(n) + " bytes, " +
                                        std::to_string(remaining()) + " left");
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const std::string& what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32(const std::string& what) { return std::bit_cast<float>(u32(what)); }
    double f64(const std::string& what) { return std::bit_cast<double>(u64(what)); }
    std::string string(std::size_t n, const std::string& what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void magic(const char (&expected)[4]) {
        if (remaining() < 4 || std::memcmp(bytes_.data(), expected, 4) != 0)
            throw FormatError(0, "bad magic, expected '" + std::string(expected, 4) + "'");
        pos_ = 4;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

template <typename T>
T get_field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::invalid_config, std::string("config lacks '") + key + "'");
    return j.at(key).get<T>();
}

json frontend_to_json(const FrontendConfig& f) {
    return {{"sample_rate_hz", f.sample_rate_hz}, {"n_mels", f.n_mels},
            {"win_samples", f.win_samples},       {"hop_samples", f.hop_samples},
            {"fft_size", f.fft_size},             {"mel_scale", "htk"},
            {"mel_fmin_hz", f.mel_fmin_hz},       {"mel_fmax_hz", f.mel_fmax_hz},
            {"window", "hann_periodic"},          {"log_floor", f.log_floor},
            {"norm_shift", f.norm_shift},         {"norm_scale", f.norm_scale}};
}

FrontendConfig frontend_from_json(const json& j) {
    FrontendConfig f;
    f.sample_rate_hz = get_field<int>(j, "sample_rate_hz");
    f.n_mels = get_field<int>(j, "n_mels");
    f.win_samples = get_field<int>(j, "win_samples");
    f.hop_samples = get_field<int>(j, "hop_samples");
    f.fft_size = get_field<int>(j, "fft_size");
    f.mel_fmin_hz = get_field<double>(j, "mel_fmin_hz");
    f.mel_fmax_hz = get_field<double>(j, "mel_fmax_hz");
    f.log_floor = get_field<double>(j, "log_floor");
    f.norm_shift = get_field<double>(j, "norm_shift");
    f.norm_scale = get_field<double>(j, "norm_scale");
    if (j.contains("mel_scale") && j.at("mel_scale") != "htk")
        throw Error(ErrorKind::invalid_config, "only the htk mel scale is supported");
    if (j.contains("window") && j.at("window") != "hann_periodic")
        throw Error(ErrorKind::invalid_config, "only the periodic Hann window is supported");
    f.validate();
    if (f.fft_size > (1 << 20) || f.n_mels > 4096)
        throw Error(ErrorKind::invalid_config, "frontend sizes are implausibly large");
    return f;
}

json arch_to_json(const ArchSpec& a) {
    json blocks = json::array();
    for (const auto& b : a.blocks) {
        blocks.push_back({{"index", b.index},
                          {"kernel", b.kernel},
                          {"in_channels", b.in_channels},
                          {"expansion_channels", b.expansion_channels},
                          {"out_channels", b.out_channels},
                          {"se_bottleneck", b.se_bottleneck ? json(*b.se_bottleneck) : json(nullptr)},
                          {"stride", b.stride},
                          {"activation", std::string(to_string(b.activation))}});
    }
    json j{{"in_channels", a.in_channels}, {"input_bins", a.input_bins}, {"blocks", blocks}};
    j["in_conv"] = a.in_conv ? json{{"out_channels", a.in_conv->out_channels},
                                    {"kernel", a.in_conv->kernel},
                                    {"stride", a.in_conv->stride},
                                    {"activation", std::string(to_string(a.in_conv->activation))}}
                             : json(nullptr);
    j["head"] = a.head ? json{{"clf1_channels", a.head->clf1_channels},
                              {"clf2_features", a.head->clf2_features},
                              {"clf3_classes", a.head->clf3_classes}}
                       : json(nullptr);
    return j;
}

ArchSpec arch_from_json(const json& j, double alpha) {
    ArchSpec a;
    a.alpha = alpha;
    a.in_channels = get_field<int>(j, "in_channels");
    a.input_bins = get_field<int>(j, "input_bins");
    if (j.contains("in_conv") && !j.at("in_conv").is_null()) {
        const auto& c = j.at("in_conv");
        a.in_conv = InConvSpec{get_field<int>(c, "out_channels"), get_field<int>(c, "kernel"),
                               get_field<int>(c, "stride"),
                               parse_activation(get_field<std::string>(c, "activation"))};
    }
    for (const auto& jb : get_field<json>(j, "blocks")) {
        BlockSpec b;
        b.index = get_field<int>(jb, "index");
        b.kernel = get_field<int>(jb, "kernel");
        b.in_channels = get_field<int>(jb, "in_channels");
        b.expansion_channels = get_field<int>(jb, "expansion_channels");
        b.out_channels = get_field<int>(jb, "out_channels");
        if (jb.contains("se_bottleneck") && !jb.at("se_bottleneck").is_null())
            b.se_bottleneck = jb.at("se_bottleneck").get<int>();
        b.stride = get_field<int>(jb, "stride");
        b.activation = parse_activation(get_field<std::string>(jb, "activation"));
        a.blocks.push_back(b);
    }
    if (j.contains("head") && !j.at("head").is_null()) {
        const auto& h = j.at("head");
        a.head = HeadSpec{get_field<int>(h, "clf1_channels"), get_field<int>(h, "clf2_features"),
                          get_field<int>(h, "clf3_classes")};
    }
    if (a.blocks.size() > 256) throw Error(ErrorKind::invalid_config, "too many blocks");
    validate_arch(a);
    return a;
}

double uniform(std::mt19937_64& rng, double bound) {
    return (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0) * bound;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string config_to_json(const ModelConfig& config) {
    json j{{"alpha", config.arch.alpha},
           {"frontend", frontend_to_json(config.frontend)},
           {"se_gate", std::string(to_string(config.net.se_gate))},
           {"padding", config.padding},
           {"arch", arch_to_json(config.arch)}};
    return j.dump();
}

ModelConfig config_from_json(std::string_view text) {
    ModelConfig c;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
        const double alpha = get_field<double>(j, "alpha");
        if (!(alpha > 0.0) || !(alpha <= 8.0))
            throw Error(ErrorKind::invalid_config, "alpha must lie in (0, 8]");
        c.frontend = frontend_from_json(get_field<json>(j, "frontend"));
        c.net.se_gate = parse_se_gate(get_field<std::string>(j, "se_gate"));
        c.padding = get_field<std::string>(j, "padding");
        if (c.padding != "symmetric")
            throw Error(ErrorKind::invalid_config, "unsupported padding convention '" + c.padding + "'");
        c.arch = arch_from_json(get_field<json>(j, "arch"), alpha);
        if (c.arch.input_bins != c.frontend.n_mels || c.arch.in_channels != 1)
            throw Error(ErrorKind::invalid_config, "network input does not match the frontend's mel bands");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_config, std::string("malformed model config: ") + e.what());
    }
    return c;
}

std::vector<std::uint8_t> encode_model(const ModelFile& model) {
    ByteWriter w;
    w.bytes(std::string_view(kModelMagic, 4));
    w.u32(kModelFormatVersion);
    w.string(config_to_json(model.config));
    w.u32(static_cast<std::uint32_t>(model.weights.size()));
    for (const auto& [name, t] : model.weights) {
        w.string(name);
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
        w.u64(t.data.size());
        for (float v : t.data) w.f32(v);
    }
    return w.take();
}

ModelFile decode_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.magic(kModelMagic);
    const std::size_t version_at = r.pos();
    if (const auto version = r.u32("format version"); version != kModelFormatVersion)
        throw FormatError(version_at, "unsupported model format version " + std::to_string(version));

    const std::size_t config_at = r.pos();
    const std::uint32_t config_len = r.u32("config length");
    const std::string config_text = r.string(config_len, "config");
    ModelFile model;
    try {
        model.config = config_from_json(config_text);
    } catch (const Error& e) {
        throw FormatError(config_at, e.what());
    }

    const std::size_t count_at = r.pos();
    const std::uint32_t n_tensors = r.u32("tensor count");
    // Smallest possible entry: name length, rank, element count.
    if (n_tensors > r.remaining() / 16)
        throw FormatError(count_at, "tensor count " + std::to_string(n_tensors) + " exceeds file size");

    for (std::uint32_t t = 0; t < n_tensors; ++t) {
        const std::uint32_t name_len = r.u32("tensor name length");
        std::string name = r.string(name_len, "tensor name");
        const std::size_t rank_at = r.pos();
        const std::uint32_t rank = r.u32("rank of " + name);
        if (rank > kMaxRank)
            throw FormatError(rank_at, "tensor '" + name + "' has rank " + std::to_string(rank));
        Shape shape(rank);
        std::uint64_t product = 1;
        bool overflow = false;
        for (auto& d : shape) {
            d = r.u32("dims of " + name);
            if (d != 0 && product > std::numeric_limits<std::uint64_t>::max() / d) overflow = true;
            product *= d;
        }
        const std::uint64_t n_elems = r.u64("element count of " + name);
        if (overflow || product != n_elems)
            throw IntegrityError(name, "dims " + shape_to_string(shape) + " do not match payload of " +
                                           std::to_string(n_elems) + " elements");
        if (n_elems > r.remaining() / 4)
            throw FormatError(r.pos(), "payload of tensor '" + name + "' is truncated");
        Tensor tensor;
        tensor.shape = std::move(shape);
        tensor.data.resize(n_elems);
        for (auto& v : tensor.data) v = r.f32(name);
        if (!model.weights.emplace(name, std::move(tensor)).second)
            throw IntegrityError(name, "appears more than once");
    }
    if (r.remaining() != 0)
        throw FormatError(r.pos(), std::to_string(r.remaining()) + " trailing bytes after tensor table");

    const auto report = validate_weights(model.config.arch, model.weights);
    if (!report.ok()) {
        const auto& issue = report.issues.front();
        throw IntegrityError(issue.name, "does not match the embedded config (" +
                                             std::to_string(report.issues.size()) + " issue(s))\n" +
                                             report.describe());
    }
    return model;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorKind::io, "error reading " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "error writing " + path.string());
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    const auto report = validate_weights(model.config.arch, model.weights);
    if (!report.ok()) throw IntegrityError(report.issues.front().name, report.describe());
    write_file(path, encode_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_model(bytes);
    } catch (const FormatError& e) {
        throw FormatError(e.offset(), path.string() + ": " + e.what());
    }
}

TensorMap random_init(const ArchSpec& spec, std::uint64_t seed) {
    validate_arch(spec);
    std::mt19937_64 rng(seed);
    TensorMap out;
    const auto layout = weight_layout(spec);
    for (const auto& [name, shape] : layout) {
        Tensor t(shape);
        const std::string leaf = name.substr(name.rfind('.') + 1);
        if (leaf == "bn_scale") {
            std::fill(t.data.begin(), t.data.end(), 1.0f);
        } else if (leaf == "bn_shift") {
            // zero
        } else if (leaf == "weight") {
            const std::size_t fan_in = t.size() / shape[0];
            const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
            for (float& v : t.data) v = static_cast<float>(uniform(rng, bound));
        } else {
            const auto& w = layout.at(name.substr(0, name.rfind('.')) + ".weight");
            const double bound = 1.0 / std::sqrt(static_cast<double>(element_count(w) / w[0]));
            for (float& v : t.data) v = static_cast<float>(uniform(rng, bound));
        }
        out.emplace(name, std::move(t));
    }
    return out;
}

ModelFile make_random_model(double alpha, std::uint64_t seed, FrontendConfig frontend) {
    ModelFile m;
    m.config.arch = build_arch(alpha);
    m.config.arch.input_bins = frontend.n_mels;
    m.config.frontend = frontend;
    m.weights = random_init(m.config.arch, seed);
    return m;
}

Network make_network(const ModelFile& model) {
    return Network(model.config.arch, model.weights, model.config.net);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& file) {
    if (file.dim == 0 ? !file.values.empty() : file.values.size() % file.dim != 0)
        throw Error(ErrorKind::invalid_input, "embedding payload is not a whole number of rows");
    if (file.has_timestamps() && file.timestamps.size() != file.count())
        throw Error(ErrorKind::invalid_input, "timestamp count does not match embedding count");
    ByteWriter w;
    w.bytes(std::string_view(kEmbeddingMagic, 4));
    w.u32(kEmbeddingFormatVersion);
    w.string(file.selector);
    w.u32(file.dim);
    w.u32(static_cast<std::uint32_t>(file.count()));
    w.u32(file.has_timestamps() ? 1u : 0u);
    for (double t : file.timestamps) w.f64(t);
    for (float v : file.values) w.f32(v);
    return w.take();
}

EmbeddingFile decode_embeddings(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.magic(kEmbeddingMagic);
    const std::size_t version_at = r.pos();
    if (const auto version = r.u32("format version"); version != kEmbeddingFormatVersion)
        throw FormatError(version_at, "unsupported embedding format version " + std::to_string(version));
    EmbeddingFile f;
    const std::uint32_t sel_len = r.u32("selector length");
    f.selector = r.string(sel_len, "selector");
    const std::size_t dim_at = r.pos();
    f.dim = r.u32("dim");
    const std::uint32_t count = r.u32("count");
    const std::size_t flags_at = r.pos();
    const std::uint32_t flags = r.u32("flags");
    if (flags & ~1u) throw FormatError(flags_at, "unknown flag bits");
    if (f.dim == 0 && count != 0) throw FormatError(dim_at, "zero dim with non-zero count");
    const std::uint64_t n_values = static_cast<std::uint64_t>(f.dim) * count;
    const std::uint64_t need = n_values * 4 + ((flags & 1u) ? static_cast<std::uint64_t>(count) * 8 : 0);
    if (need != r.remaining())
        throw FormatError(r.pos(), "payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                                       std::to_string(need));
    if (flags & 1u) {
        f.timestamps.resize(count);
        for (double& t : f.timestamps) t = r.f64("timestamps");
    }
    f.values.resize(n_values);
    for (float& v : f.values) v = r.f32("values");
    return f;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingFile& file) {
    write_file(path, encode_embeddings(file));
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_embeddings(bytes);
    } catch (const FormatError& e) {
        throw FormatError(e.offset(), path.string() + ": " + e.what());
    }
}

std::string embeddings_to_csv(const EmbeddingFile& file) {
    std::string out;
    if (file.has_timestamps()) out += "timestamp_s";
    for (std::uint32_t d = 0; d < file.dim; ++d) {
        if (d || file.has_timestamps()) out += ',';
        out += 'e' + std::to_string(d);
    }
    out += '\n';
    for (std::size_t i = 0; i < file.count(); ++i) {
        if (file.has_timestamps()) out += format_g17(file.timestamps[i]);
        const auto row = file.row(i);
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d || file.has_timestamps()) out += ',';
            out += format_g17(row[d]);
        }
        out += '\n';
    }
    return out;
}

EmbeddingFile embeddings_from_csv(std::string_view text, std::string selector) {
    EmbeddingFile f;
    f.selector = std::move(selector);
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::invalid_input, "empty CSV");
    const bool with_ts = line.rfind("timestamp_s", 0) == 0;
    std::size_t columns = 1;
    for (char c : line) columns += c == ',';
    f.dim = static_cast<std::uint32_t>(columns - (with_ts ? 1 : 0));
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ls, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw Error(ErrorKind::invalid_input, "CSV line " + std::to_string(line_no) + ": bad number");
            }
            if (with_ts && col == 0) f.timestamps.push_back(v);
            else f.values.push_back(static_cast<float>(v));
            ++col;
        }
        if (col != columns)
            throw Error(ErrorKind::invalid_input, "CSV line " + std::to_string(line_no) + ": wrong column count");
    }
    return f;
}

}  // namespace gpae
