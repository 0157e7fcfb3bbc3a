#pragma once

#include "distgen/introspect.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace distgen::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;
inline constexpr int kNumerical = 4;

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    bool quiet = false;
};

struct RenderArgs {
    std::size_t width = 64;
    std::size_t height = 64;
    std::optional<Viewport> viewport;
    double opacity = kDefaultLineOpacity;
};

/// name is a builtin ("theta_l", "theta_c", "mask") or a scene JSON path.
int cmd_gen_data(const std::string& name, const std::string& out_path, std::size_t size, std::ostream& err);

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& err);

/// kind: surface | hyperplanes | binary | distance-map. For distance-map the
/// input is a mask (PGM path or "mask").
int cmd_render(const std::string& input_path, const std::string& kind, const std::string& out_path,
               const RenderArgs& args, std::ostream& err);

/// Prints a comparison table of each prediction against truth; optionally
/// writes the CSV form.
int cmd_metrics(const std::vector<std::string>& predictions, const std::string& truth_path,
                const std::string& mask_path, const std::string& csv_path, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

} // namespace distgen::cli
