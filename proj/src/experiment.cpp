#include "distgen/experiment.hpp"

#include "distgen/errors.hpp"
#include "distgen/metrics.hpp"
#include "distgen/scene.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace distgen {

namespace {

using nlohmann::json;

void only_fields(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!names.contains(key)) {
            throw ConfigError("unknown field '" + key + "' in " + where);
        }
    }
}

double get_real(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_number()) {
        throw ConfigError(std::string("field '") + key + "' must be a number");
    }
    return obj.at(key).get<double>();
}

std::uint64_t as_u64(const json& v, const std::string& what) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    // Accept 1e8-style literals when they are exact non-negative integers.
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) {
            return static_cast<std::uint64_t>(d);
        }
    }
    throw ConfigError(what + " must be a non-negative integer");
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback) {
    return obj.contains(key) ? as_u64(obj.at(key), std::string("field '") + key + "'") : fallback;
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(std::string("field '") + key + "' must be a boolean");
    }
    return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_string()) {
        throw ConfigError(std::string("field '") + key + "' must be a string");
    }
    return obj.at(key).get<std::string>();
}

bool is_builtin_data(const std::string& name) { return name == "theta_l" || name == "theta_c"; }

std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) {
        p = base / p;
    }
    return p.string();
}

FnnMachine parse_fnn(const json& m) {
    only_fields(m,
                {"kind", "layer_sizes", "learning_rate", "weight_decay", "decay_biases", "iterations",
                 "snapshot_iterations"},
                "machine (fnn)");
    FnnMachine fnn;
    if (m.contains("layer_sizes")) {
        if (!m.at("layer_sizes").is_array()) {
            throw ConfigError("'layer_sizes' must be an array");
        }
        fnn.network.layer_sizes.clear();
        for (const json& v : m.at("layer_sizes")) {
            fnn.network.layer_sizes.push_back(static_cast<std::size_t>(as_u64(v, "layer size")));
        }
    }
    fnn.train.learning_rate = get_real(m, "learning_rate", 0.02);
    fnn.train.weight_decay = get_real(m, "weight_decay", 2e-7);
    fnn.train.decay_biases = get_bool(m, "decay_biases", false);

    const bool paper_preset = m.contains("snapshot_iterations") && m.at("snapshot_iterations").is_string();
    if (paper_preset && m.at("snapshot_iterations").get<std::string>() != "paper") {
        throw ConfigError("the only named snapshot preset is \"paper\"");
    }
    const std::uint64_t default_iterations = paper_preset ? kPaperSnapshots.back() : 0;
    fnn.train.iterations = get_u64(m, "iterations", default_iterations);
    if (fnn.train.iterations == 0) {
        throw ConfigError("fnn machine needs a positive 'iterations'");
    }
    if (paper_preset) {
        fnn.train.snapshot_iterations = kPaperSnapshots;
    } else if (m.contains("snapshot_iterations")) {
        if (!m.at("snapshot_iterations").is_array()) {
            throw ConfigError("'snapshot_iterations' must be an array or \"paper\"");
        }
        for (const json& v : m.at("snapshot_iterations")) {
            fnn.train.snapshot_iterations.push_back(as_u64(v, "snapshot iteration"));
        }
    } else {
        fnn.train.snapshot_iterations = {fnn.train.iterations};
    }
    try {
        validate(fnn.network);
        validate(fnn.train);
    } catch (const Error& e) {
        throw ConfigError(std::string("fnn machine: ") + e.what());
    }
    if (fnn.network.layer_sizes.front() != 2 || fnn.network.layer_sizes.back() != 1) {
        throw ConfigError("fnn machine must have 2 inputs and 1 output");
    }
    return fnn;
}

SvmMachine parse_svm(const json& m) {
    only_fields(m, {"kind", "nu", "gamma", "cost", "epsilon", "max_iterations", "threshold"}, "machine (nusvc)");
    SvmMachine svm;
    svm.svm.nu = get_real(m, "nu", 0.2);
    if (!m.contains("gamma")) {
        throw ConfigError("nusvc machine needs 'gamma'");
    }
    svm.svm.gamma = get_real(m, "gamma", 1.0);
    svm.svm.cost = get_real(m, "cost", 1.0);
    svm.svm.epsilon = get_real(m, "epsilon", 1e-3);
    svm.svm.max_iterations = get_u64(m, "max_iterations", svm.svm.max_iterations);
    svm.threshold = get_real(m, "threshold", 0.5);
    try {
        validate(svm.svm);
    } catch (const Error& e) {
        throw ConfigError(std::string("nusvc machine: ") + e.what());
    }
    if (!(svm.threshold >= 0.0 && svm.threshold <= 1.0)) {
        throw ConfigError("nusvc threshold must lie in [0, 1]");
    }
    return svm;
}

} // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_fields(doc, {"dataset", "mask", "size", "machine", "replicas", "output_dir", "seed", "render"}, "config");
    ExperimentConfig cfg;
    cfg.dataset = get_string(doc, "dataset", cfg.dataset);
    cfg.mask = get_string(doc, "mask", cfg.mask);
    if (!is_builtin_data(cfg.dataset)) {
        cfg.dataset = resolve_path(cfg.dataset, base_dir);
    }
    if (cfg.mask != "mask") {
        cfg.mask = resolve_path(cfg.mask, base_dir);
    }
    cfg.size = static_cast<std::size_t>(get_u64(doc, "size", cfg.size));
    if (cfg.size < 2) {
        throw ConfigError("'size' must be at least 2");
    }
    cfg.replicas = get_u64(doc, "replicas", cfg.replicas);
    if (cfg.replicas < 1) {
        throw ConfigError("'replicas' must be at least 1");
    }
    cfg.output_dir = resolve_path(get_string(doc, "output_dir", cfg.output_dir), base_dir);
    cfg.seed = get_u64(doc, "seed", 0);

    if (!doc.contains("machine")) {
        throw ConfigError("config needs a 'machine'");
    }
    const json& m = doc.at("machine");
    if (!m.is_object()) {
        throw ConfigError("'machine' must be an object");
    }
    const std::string kind = get_string(m, "kind", "");
    if (kind == "fnn") {
        cfg.machine = parse_fnn(m);
    } else if (kind == "nusvc") {
        cfg.machine = parse_svm(m);
    } else {
        throw ConfigError("machine kind must be \"fnn\" or \"nusvc\"");
    }

    if (doc.contains("render")) {
        const json& r = doc.at("render");
        only_fields(r, {"diagram_size", "viewport", "opacity"}, "render");
        cfg.render.diagram_size = static_cast<std::size_t>(get_u64(r, "diagram_size", 0));
        cfg.render.opacity = get_real(r, "opacity", kDefaultLineOpacity);
        if (r.contains("viewport")) {
            const json& v = r.at("viewport");
            if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
                throw ConfigError("'viewport' must be [x1_min, x1_max, x2_min, x2_max]");
            }
            cfg.render.diagram_viewport = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                                           v[3].get<double>()};
        }
        try {
            validate(cfg.render.diagram_viewport);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        if (!(cfg.render.opacity > 0.0 && cfg.render.opacity <= 1.0)) {
            throw ConfigError("'opacity' must lie in (0, 1]");
        }
        if (cfg.render.diagram_size == 1) {
            throw ConfigError("'diagram_size' must be 0 or at least 2");
        }
    }
    return cfg;
}

ImageGrid resolve_dataset(const ExperimentConfig& config) {
    if (is_builtin_data(config.dataset)) {
        return std::get<ImageGrid>(builtin_dataset(config.dataset, config.size));
    }
    if (!std::filesystem::exists(config.dataset)) {
        throw ConfigError("dataset file not found: " + config.dataset);
    }
    return load_pgm(config.dataset);
}

Mask resolve_mask(const ExperimentConfig& config, std::size_t width, std::size_t height) {
    if (config.mask == "mask") {
        if (width != height) {
            throw ConfigError("the builtin mask needs a square dataset");
        }
        return builtin_mask(width);
    }
    if (!std::filesystem::exists(config.mask)) {
        throw ConfigError("mask file not found: " + config.mask);
    }
    Mask mask = mask_from_image(load_pgm(config.mask));
    if (mask.width() != width || mask.height() != height) {
        throw ConfigError("mask dimensions differ from dataset dimensions");
    }
    return mask;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place");
    }
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "replica,iteration,train_mse,test_mse,train_count,test_count\n";
    for (const auto& r : rows) {
        out += std::to_string(r.replica) + ',' + std::to_string(r.iteration) + ',' + format_double(r.train_mse) + ',' +
               format_double(r.test_mse) + ',' + std::to_string(r.train_count) + ',' +
               std::to_string(r.test_count) + '\n';
    }
    return out;
}

namespace {

std::string pgm_bytes(const ImageGrid& img) {
    const auto bytes = encode_pgm(img);
    return std::string(bytes.begin(), bytes.end());
}

// Records everything a run creates so a failed run can be rolled back.
class OutputTree {
public:
    explicit OutputTree(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& relative, std::string_view bytes) {
        const std::filesystem::path full = root_ / relative;
        make_dirs(full.parent_path());
        write_file_atomic(full, bytes);
        files_.push_back(relative);
        hashes_.push_back(sha256_hex(bytes));
    }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& f : files_) {
            std::filesystem::remove(root_ / f, ec);
        }
        for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) {
            std::filesystem::remove(*it, ec);
        }
    }

    const std::vector<std::string>& files() const { return files_; }
    const std::vector<std::string>& hashes() const { return hashes_; }

private:
    void make_dirs(const std::filesystem::path& dir) {
        std::vector<std::filesystem::path> missing;
        for (auto p = dir; !p.empty() && !std::filesystem::exists(p); p = p.parent_path()) {
            missing.push_back(p);
            if (p == p.parent_path()) {
                break;
            }
        }
        for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
            std::error_code ec;
            if (!std::filesystem::create_directory(*it, ec) && ec) {
                throw IoError("cannot create directory " + it->string());
            }
            created_dirs_.push_back(*it);
        }
    }

    std::filesystem::path root_;
    std::vector<std::string> files_;
    std::vector<std::string> hashes_;
    std::vector<std::filesystem::path> created_dirs_;
};

std::string snapshot_dir(std::uint64_t replica, std::uint64_t iteration) {
    return std::to_string(replica) + "/" + std::to_string(iteration) + "/";
}

void run_fnn(const ExperimentConfig& cfg, const FnnMachine& fnn, const ImageGrid& data, const Mask& mask,
             const SampleSet& train_set, OutputTree& out, std::vector<MetricsRow>& rows, std::ostream* log) {
    const std::size_t w = data.width();
    const std::size_t h = data.height();
    const std::size_t diagram = cfg.render.diagram_size ? cfg.render.diagram_size : w;
    for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
        const std::uint64_t replica_seed = cfg.seed + r;
        Rng rng(replica_seed);
        NetworkParams params = init_network(fnn.network, rng);
        TrainConfig tc = fnn.train;
        tc.seed = rng.next();
        if (log) {
            *log << "replica " << r << ": training " << tc.iterations << " iterations (seed " << replica_seed
                 << ")\n";
        }
        const auto sink = [&](std::uint64_t iteration, NetworkParams snapshot) {
            const ImageGrid surface =
                eval_grid([&](double x1, double x2) { return predict(snapshot, x1, x2); }, w, h, Viewport::data());
            const ZeroLines zeros = first_layer_zero_lines(snapshot);
            const ImageGrid diagram_img = render_zero_lines(zeros.lines, diagram, diagram,
                                                            cfg.render.diagram_viewport, cfg.render.opacity);
            const std::string dir = snapshot_dir(r, iteration);
            out.write(dir + "surface.pgm", pgm_bytes(surface));
            out.write(dir + "hyperplanes.pgm", pgm_bytes(diagram_img));
            out.write(dir + "model.txt", network_to_text(snapshot));
            const RegionReport report = masked_mse(surface, data, mask);
            rows.push_back({r, iteration, report.train_mse, report.test_mse, report.train_count, report.test_count});
            if (log) {
                *log << "replica " << r << " iteration " << iteration << ": train_mse "
                     << format_double(report.train_mse) << " test_mse " << format_double(report.test_mse) << '\n';
            }
        };
        try {
            train(std::move(params), train_set, tc, sink);
        } catch (const DivergenceError& e) {
            throw DivergenceError("replica " + std::to_string(r) + ": " + e.what(), e.iteration);
        }
    }
}

void run_svm(const ExperimentConfig& cfg, const SvmMachine& svm, const ImageGrid& data, const Mask& mask,
             OutputTree& out, std::vector<MetricsRow>& rows, std::ostream* log) {
    const LabeledSet labeled = binarize(data, svm.threshold, mask);
    const std::size_t w = data.width();
    const std::size_t h = data.height();
    for (std::uint64_t r = 0; r < cfg.replicas; ++r) {
        if (log) {
            *log << "replica " << r << ": solving nu-SVC on " << labeled.size() << " points\n";
        }
        const NuSvcResult result = solve_nu_svc(labeled, svm.svm);
        const ImageGrid surface = decision_grid(result.model, w, h, Viewport::data());
        const ImageGrid binary = binary_decision_grid(result.model, w, h, Viewport::data());
        const std::string dir = snapshot_dir(r, result.iterations);
        out.write(dir + "surface.pgm", pgm_bytes(surface));
        out.write(dir + "binary.pgm", pgm_bytes(binary));
        out.write(dir + "model.txt", svm_model_to_text(result.model));
        const RegionReport report = masked_mse(binary, data, mask);
        rows.push_back({r, result.iterations, report.train_mse, report.test_mse, report.train_count,
                        report.test_count});
        if (log) {
            *log << "replica " << r << ": " << result.iterations << " solver iterations, "
                 << result.model.support_points.size() << " support vectors, test_mse "
                 << format_double(report.test_mse) << '\n';
        }
    }
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& config, std::string_view config_bytes, std::ostream* log) {
    const ImageGrid data = resolve_dataset(config);
    const Mask mask = resolve_mask(config, data.width(), data.height());
    OutputTree out(config.output_dir);
    std::vector<MetricsRow> rows;
    try {
        if (const auto* fnn = std::get_if<FnnMachine>(&config.machine)) {
            const Split split = split_by_mask(data, mask);
            run_fnn(config, *fnn, data, mask, split.train, out, rows, log);
        } else {
            run_svm(config, std::get<SvmMachine>(config.machine), data, mask, out, rows, log);
        }
        out.write("metrics.csv", metrics_csv(rows));

        std::vector<std::pair<std::string, std::string>> listed;
        for (std::size_t i = 0; i < out.files().size(); ++i) {
            listed.emplace_back(out.files()[i], out.hashes()[i]);
        }
        std::sort(listed.begin(), listed.end());
        json files = json::array();
        for (const auto& [path, hash] : listed) {
            files.push_back({{"path", path}, {"sha256", hash}});
        }
        json manifest = {{"tool", "distgen"},
                         {"version", "1.0.0"},
                         {"config_sha256", sha256_hex(config_bytes)},
                         {"seed", config.seed},
                         {"replicas", config.replicas},
                         {"files", files}};
        out.write("manifest.json", manifest.dump(2) + "\n");
    } catch (...) {
        out.rollback();
        throw;
    }
    return {rows, out.files()};
}

} // namespace distgen
