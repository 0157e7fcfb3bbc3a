#include "distgen/mlp.hpp"

#include "distgen/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace distgen {

void validate(const NetworkSpec& spec) {
    if (spec.layer_sizes.size() < 2) {
        throw DimensionError("a network needs at least an input and an output layer");
    }
    for (std::size_t n : spec.layer_sizes) {
        if (n == 0) {
            throw DimensionError("layer sizes must be positive");
        }
    }
}

NetworkSpec NetworkParams::spec() const {
    NetworkSpec s;
    s.layer_sizes.clear();
    s.layer_sizes.push_back(layers.front().inputs);
    for (const auto& layer : layers) {
        s.layer_sizes.push_back(layer.outputs);
    }
    return s;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weights.size() + layer.biases.size();
    }
    return n;
}

NetworkParams zero_network(const NetworkSpec& spec) {
    validate(spec);
    NetworkParams params;
    for (std::size_t k = 1; k < spec.layer_sizes.size(); ++k) {
        DenseLayer layer;
        layer.inputs = spec.layer_sizes[k - 1];
        layer.outputs = spec.layer_sizes[k];
        layer.weights.assign(layer.inputs * layer.outputs, 0.0);
        layer.biases.assign(layer.outputs, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

void validate(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw RangeError("learning rate must be positive and finite");
    }
    if (!(config.weight_decay >= 0.0 && config.weight_decay < 1.0)) {
        throw RangeError("weight decay must lie in [0, 1)");
    }
    if (!std::is_sorted(config.snapshot_iterations.begin(), config.snapshot_iterations.end())) {
        throw RangeError("snapshot iterations must be sorted");
    }
    for (std::uint64_t s : config.snapshot_iterations) {
        if (s < 1 || s > config.iterations) {
            throw RangeError("snapshot iteration " + std::to_string(s) + " outside [1, " +
                             std::to_string(config.iterations) + "]");
        }
    }
}

NetworkParams init_network(const NetworkSpec& spec, Rng& rng) {
    NetworkParams params = zero_network(spec);
    for (auto& layer : params.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
        for (double& w : layer.weights) {
            w = rng.uniform(-bound, bound);
        }
    }
    return params;
}

namespace {

void check_input(const NetworkParams& params, std::span<const double> x) {
    if (params.layers.empty()) {
        throw DimensionError("network has no layers");
    }
    if (x.size() != params.input_size()) {
        throw DimensionError("input has " + std::to_string(x.size()) + " values, network expects " +
                             std::to_string(params.input_size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw NonFiniteError("non-finite network input");
        }
    }
}

void layer_forward(const DenseLayer& layer, const std::vector<double>& in, std::vector<double>& out) {
    out.resize(layer.outputs);
    const double* w = layer.weights.data();
    for (std::size_t i = 0; i < layer.outputs; ++i, w += layer.inputs) {
        double z = layer.biases[i];
        for (std::size_t j = 0; j < layer.inputs; ++j) {
            z += w[j] * in[j];
        }
        out[i] = std::tanh(z);
    }
}

} // namespace

ForwardResult forward(const NetworkParams& params, std::span<const double> x) {
    check_input(params, x);
    ForwardResult result;
    result.activations.reserve(params.layers.size() + 1);
    result.activations.emplace_back(x.begin(), x.end());
    for (const auto& layer : params.layers) {
        std::vector<double> out;
        layer_forward(layer, result.activations.back(), out);
        result.activations.push_back(std::move(out));
    }
    result.output = result.activations.back();
    return result;
}

double predict(const NetworkParams& params, double x1, double x2) {
    const double x[2] = {x1, x2};
    const auto result = forward(params, x);
    if (result.output.size() != 1) {
        throw DimensionError("predict needs a single-output network");
    }
    return result.output[0];
}

double sample_loss(const NetworkParams& params, const Sample& sample) {
    const double e = predict(params, sample.x1, sample.x2) - sample.y;
    return 0.5 * e * e;
}

Backprop::Backprop(const NetworkParams& shape) {
    activations_.resize(shape.layers.size() + 1);
    deltas_.resize(shape.layers.size());
    activations_[0].resize(shape.input_size());
    for (std::size_t k = 0; k < shape.layers.size(); ++k) {
        activations_[k + 1].resize(shape.layers[k].outputs);
        deltas_[k].resize(shape.layers[k].outputs);
    }
}

namespace {

// Fills deltas (dL/dz per layer) for a single-output network. Returns false
// on a non-finite delta.
bool backward(const NetworkParams& params, const Sample& sample, std::vector<std::vector<double>>& acts,
              std::vector<std::vector<double>>& deltas) {
    acts[0][0] = sample.x1;
    acts[0][1] = sample.x2;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        layer_forward(params.layers[k], acts[k], acts[k + 1]);
    }
    const std::size_t last = params.layers.size() - 1;
    const double o = acts[last + 1][0];
    deltas[last][0] = (o - sample.y) * (1.0 - o * o);
    if (!std::isfinite(deltas[last][0])) {
        return false;
    }
    for (std::size_t k = last; k > 0; --k) {
        const DenseLayer& layer = params.layers[k];
        const std::vector<double>& below = acts[k];
        std::vector<double>& d = deltas[k - 1];
        std::fill(d.begin(), d.end(), 0.0);
        for (std::size_t i = 0; i < layer.outputs; ++i) {
            const double di = deltas[k][i];
            const double* w = &layer.weights[i * layer.inputs];
            for (std::size_t j = 0; j < layer.inputs; ++j) {
                d[j] += w[j] * di;
            }
        }
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] *= 1.0 - below[j] * below[j];
            if (!std::isfinite(d[j])) {
                return false;
            }
        }
    }
    return true;
}

void check_sample(const NetworkParams& params, const Sample& sample) {
    const double x[2] = {sample.x1, sample.x2};
    check_input(params, x);
    if (params.output_size() != 1) {
        throw DimensionError("training needs a single-output network");
    }
    if (!std::isfinite(sample.y)) {
        throw NonFiniteError("non-finite sample target");
    }
}

} // namespace

bool Backprop::step(NetworkParams& params, const Sample& sample, const TrainConfig& config) {
    if (!backward(params, sample, activations_, deltas_)) {
        return false;
    }
    const double lr = config.learning_rate;
    const double keep = 1.0 - config.weight_decay;
    bool finite = true;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        DenseLayer& layer = params.layers[k];
        const std::vector<double>& in = activations_[k];
        for (std::size_t i = 0; i < layer.outputs; ++i) {
            const double di = deltas_[k][i];
            double* w = &layer.weights[i * layer.inputs];
            for (std::size_t j = 0; j < layer.inputs; ++j) {
                w[j] = (w[j] - lr * di * in[j]) * keep;
                finite = finite && std::isfinite(w[j]);
            }
            double& b = layer.biases[i];
            b -= lr * di;
            if (config.decay_biases) {
                b *= keep;
            }
            finite = finite && std::isfinite(b);
        }
    }
    return finite;
}

NetworkParams loss_gradient(const NetworkParams& params, const Sample& sample) {
    check_sample(params, sample);
    std::vector<std::vector<double>> acts(params.layers.size() + 1);
    std::vector<std::vector<double>> deltas(params.layers.size());
    acts[0].resize(2);
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        acts[k + 1].resize(params.layers[k].outputs);
        deltas[k].resize(params.layers[k].outputs);
    }
    if (!backward(params, sample, acts, deltas)) {
        throw DivergenceError("non-finite gradient", 0);
    }
    NetworkParams grad = zero_network(params.spec());
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        DenseLayer& g = grad.layers[k];
        for (std::size_t i = 0; i < g.outputs; ++i) {
            for (std::size_t j = 0; j < g.inputs; ++j) {
                g.weight(i, j) = deltas[k][i] * acts[k][j];
            }
            g.biases[i] = deltas[k][i];
        }
    }
    return grad;
}

NetworkParams backprop_step(const NetworkParams& params, const Sample& sample, const TrainConfig& config) {
    check_sample(params, sample);
    NetworkParams next = params;
    Backprop scratch(next);
    if (!scratch.step(next, sample, config)) {
        throw DivergenceError("non-finite gradient or weight after update", 0);
    }
    return next;
}

NetworkParams train(NetworkParams params, const SampleSet& train_set, const TrainConfig& config,
                    const SnapshotSink& snapshot_sink) {
    validate(config);
    if (config.iterations == 0) {
        return params;
    }
    if (train_set.empty()) {
        throw EmptyTrainingError("training set is empty");
    }
    for (const Sample& s : train_set) {
        check_sample(params, s);
    }
    Rng rng(config.seed);
    Backprop scratch(params);
    auto next_snapshot = config.snapshot_iterations.begin();
    const auto n = static_cast<std::uint64_t>(train_set.size());
    for (std::uint64_t it = 1; it <= config.iterations; ++it) {
        const Sample& s = train_set[rng.below(n)];
        if (!scratch.step(params, s, config)) {
            throw DivergenceError("training diverged at iteration " + std::to_string(it), it);
        }
        while (next_snapshot != config.snapshot_iterations.end() && *next_snapshot == it) {
            if (snapshot_sink) {
                snapshot_sink(it, params);
            }
            ++next_snapshot;
        }
    }
    return params;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw FormatError("bad number '" + token + "'");
    }
    return v;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) {
        out.push_back(t);
    }
    return out;
}

} // namespace

std::string network_to_text(const NetworkParams& params) {
    std::string out = "FNN 1\n";
    const NetworkSpec spec = params.spec();
    for (std::size_t k = 0; k < spec.layer_sizes.size(); ++k) {
        out += (k ? " " : "") + std::to_string(spec.layer_sizes[k]);
    }
    out += '\n';
    for (const auto& layer : params.layers) {
        for (std::size_t i = 0; i < layer.outputs; ++i) {
            for (std::size_t j = 0; j < layer.inputs; ++j) {
                out += format_double(layer.weight(i, j));
                out += ' ';
            }
            out += format_double(layer.biases[i]);
            out += '\n';
        }
    }
    return out;
}

NetworkParams network_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_tokens(line) != std::vector<std::string>{"FNN", "1"}) {
        throw FormatError("network file must start with 'FNN 1'");
    }
    if (!std::getline(in, line)) {
        throw FormatError("network file lacks the layer-size line");
    }
    NetworkSpec spec;
    spec.layer_sizes.clear();
    for (const auto& t : split_tokens(line)) {
        std::size_t n = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), n);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
            throw FormatError("bad layer size '" + t + "'");
        }
        spec.layer_sizes.push_back(n);
    }
    validate(spec);
    NetworkParams params = zero_network(spec);
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!split_tokens(line).empty()) {
            rows.push_back(line);
        }
    }
    std::size_t expected_rows = 0;
    for (const auto& layer : params.layers) {
        expected_rows += layer.outputs;
    }
    if (rows.size() != expected_rows) {
        throw DimensionError("network file has " + std::to_string(rows.size()) + " neuron rows, declared sizes need " +
                             std::to_string(expected_rows));
    }
    std::size_t r = 0;
    for (auto& layer : params.layers) {
        for (std::size_t i = 0; i < layer.outputs; ++i, ++r) {
            const auto tokens = split_tokens(rows[r]);
            if (tokens.size() != layer.inputs + 1) {
                throw DimensionError("neuron row " + std::to_string(r + 1) + " has " + std::to_string(tokens.size()) +
                                     " values, expected " + std::to_string(layer.inputs + 1));
            }
            for (std::size_t j = 0; j < layer.inputs; ++j) {
                layer.weight(i, j) = parse_double(tokens[j]);
            }
            layer.biases[i] = parse_double(tokens.back());
        }
    }
    return params;
}

void save_network(const NetworkParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << network_to_text(params);
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

NetworkParams load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return network_from_text(buf.str());
}

} // namespace distgen
