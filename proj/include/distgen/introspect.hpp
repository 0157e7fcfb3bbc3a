#pragma once

#include "distgen/image.hpp"
#include "distgen/mlp.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace distgen {

/// a*x1 + b*x2 + c = 0 with a^2 + b^2 = 1 and the first nonzero of (a, b)
/// positive.
struct Line2D {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;

    /// Signed distance of p from the line.
    double signed_distance(Point p) const { return a * p.x1 + b * p.x2 + c; }
};

/// Normalizes w1*x1 + w2*x2 + bias = 0. Returns nullopt when w1 == w2 == 0.
std::optional<Line2D> make_line(double w1, double w2, double bias);

struct Viewport {
    double x1_min = -1.0;
    double x1_max = 1.0;
    double x2_min = -1.0;
    double x2_max = 1.0;

    /// The unit data square, drawn as a dotted rectangle in diagrams.
    static Viewport data() { return {-0.5, 0.5, -0.5, 0.5}; }
};

void validate(const Viewport& vp);

/// Pixel centre of (col, row), generalizing pixel_to_coords to vp.
Point viewport_point(const Viewport& vp, std::size_t col, std::size_t row, std::size_t width, std::size_t height);

/// The part of an infinite line inside vp, if any.
std::optional<std::pair<Point, Point>> clip_line(const Line2D& line, const Viewport& vp);

using Predictor = std::function<double(double x1, double x2)>;

/// Samples predictor at every pixel centre and clamps to [-0.5, 0.5].
ImageGrid eval_grid(const Predictor& predictor, std::size_t width, std::size_t height,
                    const Viewport& vp = Viewport::data());

struct ZeroLines {
    std::vector<Line2D> lines;
    /// Line index -> neuron index.
    std::vector<std::size_t> neurons;
    /// Neurons whose input weights are both zero.
    std::vector<std::size_t> degenerate;
};

/// Zero-output lines of the first hidden layer of a 2-input network.
ZeroLines first_layer_zero_lines(const NetworkParams& params);

constexpr double kDefaultLineOpacity = 0.25;

/// White canvas; each line multiplies (v + 0.5) by (1 - opacity) at every
/// pixel whose centre lies within half a pixel diagonal. The data square is
/// then overdrawn with a 2-on/2-off black dotted border.
ImageGrid render_zero_lines(const std::vector<Line2D>& lines, std::size_t width, std::size_t height,
                            const Viewport& vp = Viewport{}, double opacity = kDefaultLineOpacity);

struct DistanceMap {
    /// Affinely rescaled so the minimum maps to -0.5 and the maximum to 0.5.
    ImageGrid normalized;
    /// Row-major Euclidean distance to the nearest training pixel centre.
    std::vector<double> raw;
};

DistanceMap distance_to_training_map(const Mask& mask);

} // namespace distgen
