#pragma once

#include "distgen/image.hpp"
#include "distgen/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace distgen {

/// Layer widths, inputs first and outputs last. The reference machine is
/// 2-16-16-1.
struct NetworkSpec {
    std::vector<std::size_t> layer_sizes{2, 16, 16, 1};
};

void validate(const NetworkSpec& spec);

/// One dense tanh layer; weights are row-major, one row per neuron.
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    double weight(std::size_t neuron, std::size_t input) const { return weights[neuron * inputs + input]; }
    double& weight(std::size_t neuron, std::size_t input) { return weights[neuron * inputs + input]; }

    bool operator==(const DenseLayer&) const = default;
};

struct NetworkParams {
    std::vector<DenseLayer> layers;

    NetworkSpec spec() const;
    std::size_t input_size() const { return layers.front().inputs; }
    std::size_t output_size() const { return layers.back().outputs; }
    std::size_t parameter_count() const;

    bool operator==(const NetworkParams&) const = default;
};

/// All-zero parameters shaped by spec.
NetworkParams zero_network(const NetworkSpec& spec);

struct TrainConfig {
    double learning_rate = 0.02;
    double weight_decay = 2e-7;
    /// Biases are excluded from decay unless set.
    bool decay_biases = false;
    std::uint64_t iterations = 0;
    std::vector<std::uint64_t> snapshot_iterations;
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

/// Weights uniform in +-1/sqrt(fan_in), biases zero. Draws are consumed layer
/// by layer, then row-major within each weight matrix.
NetworkParams init_network(const NetworkSpec& spec, Rng& rng);

struct ForwardResult {
    std::vector<double> output;
    /// activations[0] is the input; activations[k] is the output of layer k.
    std::vector<std::vector<double>> activations;
};

ForwardResult forward(const NetworkParams& params, std::span<const double> x);

/// Scalar output of a single-output network at (x1, x2).
double predict(const NetworkParams& params, double x1, double x2);

/// Half squared error of a single-output network on one sample.
double sample_loss(const NetworkParams& params, const Sample& sample);

/// d(sample_loss)/d(parameter), laid out like params.
NetworkParams loss_gradient(const NetworkParams& params, const Sample& sample);

/// One online update: w -= lr * dL/dw, then w *= (1 - decay).
NetworkParams backprop_step(const NetworkParams& params, const Sample& sample, const TrainConfig& config);

using SnapshotSink = std::function<void(std::uint64_t iteration, NetworkParams params)>;

/// Runs config.iterations online steps on samples drawn uniformly with
/// replacement from an Rng seeded with config.seed. The sink receives its own
/// copy of the parameters right after each snapshot iteration.
NetworkParams train(NetworkParams params, const SampleSet& train_set, const TrainConfig& config,
                    const SnapshotSink& snapshot_sink = {});

/// Reusable scratch space for the in-place update used by train().
class Backprop {
public:
    explicit Backprop(const NetworkParams& shape);

    /// Applies one update in place. Returns false if a gradient or updated
    /// parameter is non-finite; params are then left partially updated.
    bool step(NetworkParams& params, const Sample& sample, const TrainConfig& config);

private:
    std::vector<std::vector<double>> activations_;
    std::vector<std::vector<double>> deltas_;
};

void save_network(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_network(const std::filesystem::path& path);
std::string network_to_text(const NetworkParams& params);
NetworkParams network_from_text(const std::string& text);

/// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

} // namespace distgen
