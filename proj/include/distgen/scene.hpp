#pragma once

#include "distgen/image.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace distgen {

/// A straight stroke of constant thickness with butt ends. The dash pattern
/// starts "on" at endpoint_a; dash_off == 0 draws a solid line.
struct DashedLine {
    Point endpoint_a;
    Point endpoint_b;
    double thickness = 0.0;
    double dash_on = 0.0;
    double dash_off = 0.0;
    double value = 0.5;
};

/// A ring of the given thickness centred on the radius, or a disc if filled.
struct Circle {
    Point center;
    double radius = 0.0;
    double thickness = 0.0;
    bool filled = false;
    double value = 0.5;
};

using Shape = std::variant<DashedLine, Circle>;

struct SceneSpec {
    double background = -0.5;
    std::vector<Shape> shapes;
};

/// Throws RangeError on a geometry or brightness invariant violation.
void validate(const SceneSpec& spec);

bool covers(const DashedLine& line, Point p);
bool covers(const Circle& circle, Point p);

/// Each pixel takes the value of the last shape covering its centre, else the
/// background.
ImageGrid render_scene(const SceneSpec& spec, std::size_t width, std::size_t height);

SceneSpec scene_from_json(std::string_view text);
std::string scene_to_json(const SceneSpec& spec);

/// Default feature scenes in data coordinates. Lengths are multiples of 1/63,
/// one pixel step of the 64 x 64 reference grid; other sizes rasterize the
/// same picture.
SceneSpec builtin_scene(std::string_view name);

/// Everything is training except a centred vertical band of ~40% of the width
/// (26 of 64 columns).
Mask builtin_mask(std::size_t size = 64);

using BuiltinData = std::variant<ImageGrid, Mask>;

/// "theta_l", "theta_c" or "mask"; throws NameError otherwise.
BuiltinData builtin_dataset(std::string_view name, std::size_t size = 64);

} // namespace distgen
