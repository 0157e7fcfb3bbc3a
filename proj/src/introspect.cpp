#include "distgen/introspect.hpp"

#include "distgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace distgen {

std::optional<Line2D> make_line(double w1, double w2, double bias) {
    const double norm = std::hypot(w1, w2);
    if (norm == 0.0) {
        return std::nullopt;
    }
    Line2D line{w1 / norm, w2 / norm, bias / norm};
    const double lead = line.a != 0.0 ? line.a : line.b;
    if (lead < 0.0) {
        line = {-line.a, -line.b, -line.c};
    }
    // Avoid -0.0 so equal lines compare and print equal.
    if (line.a == 0.0) {
        line.a = 0.0;
    }
    if (line.b == 0.0) {
        line.b = 0.0;
    }
    return line;
}

void validate(const Viewport& vp) {
    if (!(vp.x1_min < vp.x1_max) || !(vp.x2_min < vp.x2_max)) {
        throw RangeError("viewport bounds must satisfy min < max on both axes");
    }
}

Point viewport_point(const Viewport& vp, std::size_t col, std::size_t row, std::size_t width, std::size_t height) {
    if (width < 2 || height < 2) {
        throw DegenerateGridError("viewport mapping needs at least 2 pixels per axis");
    }
    if (col >= width || row >= height) {
        throw IndexError("pixel index out of range");
    }
    const double x1 = vp.x1_min + (vp.x1_max - vp.x1_min) * static_cast<double>(col) / static_cast<double>(width - 1);
    const double x2 = vp.x2_min + (vp.x2_max - vp.x2_min) * static_cast<double>(height - 1 - row) /
                                      static_cast<double>(height - 1);
    return {x1, x2};
}

std::optional<std::pair<Point, Point>> clip_line(const Line2D& line, const Viewport& vp) {
    // Parametrize as foot + t * direction and clip t against each slab.
    const Point foot{-line.a * line.c, -line.b * line.c};
    const Point dir{-line.b, line.a};
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    const auto slab = [&](double origin, double d, double lo, double hi) {
        if (d == 0.0) {
            return origin >= lo && origin <= hi;
        }
        double t0 = (lo - origin) / d;
        double t1 = (hi - origin) / d;
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_lo = std::max(t_lo, t0);
        t_hi = std::min(t_hi, t1);
        return true;
    };
    if (!slab(foot.x1, dir.x1, vp.x1_min, vp.x1_max) || !slab(foot.x2, dir.x2, vp.x2_min, vp.x2_max) ||
        t_lo > t_hi) {
        return std::nullopt;
    }
    return std::make_pair(Point{foot.x1 + t_lo * dir.x1, foot.x2 + t_lo * dir.x2},
                          Point{foot.x1 + t_hi * dir.x1, foot.x2 + t_hi * dir.x2});
}

ImageGrid eval_grid(const Predictor& predictor, std::size_t width, std::size_t height, const Viewport& vp) {
    validate(vp);
    std::vector<double> values(width * height);
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            const Point p = viewport_point(vp, col, row, width, height);
            const double v = predictor(p.x1, p.x2);
            if (!std::isfinite(v)) {
                throw NonFiniteError("predictor returned a non-finite value at pixel (" + std::to_string(col) +
                                     ", " + std::to_string(row) + ")");
            }
            values[row * width + col] = std::clamp(v, -0.5, 0.5);
        }
    }
    return ImageGrid(width, height, std::move(values));
}

ZeroLines first_layer_zero_lines(const NetworkParams& params) {
    if (params.layers.empty() || params.input_size() != 2) {
        throw DimensionError("zero-line extraction needs a 2-input network");
    }
    const DenseLayer& first = params.layers.front();
    ZeroLines out;
    for (std::size_t i = 0; i < first.outputs; ++i) {
        if (auto line = make_line(first.weight(i, 0), first.weight(i, 1), first.biases[i])) {
            out.lines.push_back(*line);
            out.neurons.push_back(i);
        } else {
            out.degenerate.push_back(i);
        }
    }
    return out;
}

ImageGrid render_zero_lines(const std::vector<Line2D>& lines, std::size_t width, std::size_t height,
                            const Viewport& vp, double opacity) {
    validate(vp);
    if (!(opacity > 0.0 && opacity <= 1.0)) {
        throw RangeError("opacity must lie in (0, 1]");
    }
    if (width < 2 || height < 2) {
        throw DegenerateGridError("diagram needs at least 2 pixels per axis");
    }
    const double step_x = (vp.x1_max - vp.x1_min) / static_cast<double>(width - 1);
    const double step_y = (vp.x2_max - vp.x2_min) / static_cast<double>(height - 1);
    const double radius = 0.5 * std::hypot(step_x, step_y);
    const double keep = 1.0 - opacity;

    // Work in "height above black" so darkening composes multiplicatively.
    std::vector<double> level(width * height, 1.0);
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            const Point p = viewport_point(vp, col, row, width, height);
            double& v = level[row * width + col];
            for (const Line2D& line : lines) {
                if (std::abs(line.signed_distance(p)) <= radius) {
                    v *= keep;
                }
            }
        }
    }

    const auto to_col = [&](double x1) { return std::llround((x1 - vp.x1_min) / step_x); };
    const auto to_row = [&](double x2) { return std::llround((vp.x2_max - x2) / step_y); };
    const long long left = to_col(-0.5);
    const long long right = to_col(0.5);
    const long long top = to_row(0.5);
    const long long bottom = to_row(-0.5);
    const auto dot = [&](long long col, long long row, long long k) {
        if (k % 4 < 2 && col >= 0 && row >= 0 && col < static_cast<long long>(width) &&
            row < static_cast<long long>(height)) {
            level[static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)] = 0.0;
        }
    };
    for (long long col = left; col <= right; ++col) {
        dot(col, top, col - left);
        dot(col, bottom, col - left);
    }
    for (long long row = top; row <= bottom; ++row) {
        dot(left, row, row - top);
        dot(right, row, row - top);
    }

    std::vector<double> values(level.size());
    std::transform(level.begin(), level.end(), values.begin(),
                   [](double l) { return std::clamp(l - 0.5, -0.5, 0.5); });
    return ImageGrid(width, height, std::move(values));
}

DistanceMap distance_to_training_map(const Mask& mask) {
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    std::vector<Point> training;
    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < w; ++col) {
            if (mask.at(col, row)) {
                training.push_back(pixel_to_coords(col, row, w, h));
            }
        }
    }
    if (training.empty()) {
        throw EmptyTrainingError("mask has no training pixels");
    }
    std::vector<double> raw(w * h);
    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < w; ++col) {
            const Point p = pixel_to_coords(col, row, w, h);
            double best = std::numeric_limits<double>::infinity();
            for (const Point& t : training) {
                best = std::min(best, std::hypot(p.x1 - t.x1, p.x2 - t.x2));
            }
            raw[row * w + col] = best;
        }
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double min = *lo;
    const double span = *hi - *lo;
    std::vector<double> values(raw.size(), -0.5);
    if (span > 0.0) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            values[i] = std::clamp((raw[i] - min) / span - 0.5, -0.5, 0.5);
        }
    }
    return {ImageGrid(w, h, std::move(values)), std::move(raw)};
}

} // namespace distgen
