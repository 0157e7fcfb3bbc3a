#pragma once

#include "distgen/image.hpp"
#include "distgen/introspect.hpp"
#include "distgen/mlp.hpp"
#include "distgen/svm.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace distgen {

/// Snapshot schedule of the reference runs.
inline const std::vector<std::uint64_t> kPaperSnapshots{10'000'000, 31'622'777, 100'000'000};

struct FnnMachine {
    NetworkSpec network;
    /// iterations, snapshots and learning parameters; the seed is derived per
    /// replica.
    TrainConfig train;
};

struct SvmMachine {
    NuSvcConfig svm;
    double threshold = 0.5;
};

struct RenderOptions {
    /// Hyperplane diagram edge length in pixels; 0 uses the dataset width.
    std::size_t diagram_size = 0;
    Viewport diagram_viewport{};
    double opacity = kDefaultLineOpacity;
};

struct ExperimentConfig {
    /// Builtin name ("theta_l", "theta_c") or a PGM path.
    std::string dataset = "theta_l";
    /// Builtin "mask" or a PGM path (dark pixels are training pixels).
    std::string mask = "mask";
    /// Resolution of builtin datasets and masks.
    std::size_t size = 64;
    std::variant<FnnMachine, SvmMachine> machine;
    std::uint64_t replicas = 4;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    RenderOptions render;
};

/// Parses the JSON config. Unknown fields raise ConfigError. Relative paths
/// are resolved against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

struct MetricsRow {
    std::uint64_t replica = 0;
    std::uint64_t iteration = 0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
};

struct RunSummary {
    std::vector<MetricsRow> rows;
    /// Paths relative to the output directory.
    std::vector<std::string> files;
};

/// Loads or synthesizes the dataset and mask named by the config.
ImageGrid resolve_dataset(const ExperimentConfig& config);
Mask resolve_mask(const ExperimentConfig& config, std::size_t width, std::size_t height);

/// Trains every replica and writes <out>/<replica>/<iteration>/{surface.pgm,
/// hyperplanes.pgm | binary.pgm, model.txt}, <out>/metrics.csv and
/// <out>/manifest.json. config_bytes is hashed into the manifest. Files
/// written by a failed run are removed before the error propagates.
RunSummary run_experiment(const ExperimentConfig& config, std::string_view config_bytes, std::ostream* log = nullptr);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace distgen
