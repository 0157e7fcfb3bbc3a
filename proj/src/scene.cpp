#include "distgen/scene.hpp"

#include "distgen/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace distgen {

namespace {

// Coverage and dash-phase comparisons treat boundary ties as covered/on so
// lattice points that fall exactly on a stroke edge render the same way on
// every platform.
constexpr double kEdgeTolerance = 1e-9;

void check_value(double v, const char* what) {
    if (!(v >= -0.5 && v <= 0.5)) {
        throw RangeError(std::string(what) + " brightness outside [-0.5, 0.5]");
    }
}

bool finite(Point p) { return std::isfinite(p.x1) && std::isfinite(p.x2); }

} // namespace

void validate(const SceneSpec& spec) {
    check_value(spec.background, "background");
    for (const Shape& shape : spec.shapes) {
        if (const auto* line = std::get_if<DashedLine>(&shape)) {
            if (!finite(line->endpoint_a) || !finite(line->endpoint_b)) {
                throw RangeError("line endpoints must be finite");
            }
            if (!(line->thickness > 0.0)) {
                throw RangeError("line thickness must be positive");
            }
            if (!(line->dash_off >= 0.0)) {
                throw RangeError("dash_off must be non-negative");
            }
            if (line->dash_off > 0.0 && !(line->dash_on > 0.0)) {
                throw RangeError("dash_on must be positive for a dashed line");
            }
            check_value(line->value, "line");
        } else {
            const auto& circle = std::get<Circle>(shape);
            if (!finite(circle.center)) {
                throw RangeError("circle center must be finite");
            }
            if (!(circle.radius > 0.0)) {
                throw RangeError("circle radius must be positive");
            }
            if (!(circle.thickness > 0.0)) {
                throw RangeError("circle thickness must be positive");
            }
            check_value(circle.value, "circle");
        }
    }
}

bool covers(const DashedLine& line, Point p) {
    const double dx = line.endpoint_b.x1 - line.endpoint_a.x1;
    const double dy = line.endpoint_b.x2 - line.endpoint_a.x2;
    const double length = std::hypot(dx, dy);
    const double px = p.x1 - line.endpoint_a.x1;
    const double py = p.x2 - line.endpoint_a.x2;
    if (length == 0.0) {
        return std::hypot(px, py) <= line.thickness / 2 + kEdgeTolerance;
    }
    const double along = (px * dx + py * dy) / length;
    const double across = std::abs(px * dy - py * dx) / length;
    if (across > line.thickness / 2 + kEdgeTolerance) {
        return false;
    }
    if (along < -kEdgeTolerance || along > length + kEdgeTolerance) {
        return false;
    }
    if (line.dash_off <= 0.0) {
        return true;
    }
    const double period = line.dash_on + line.dash_off;
    double cycles = along / period;
    if (std::abs(cycles - std::round(cycles)) < kEdgeTolerance) {
        cycles = std::round(cycles);
    }
    const double phase = (cycles - std::floor(cycles)) * period;
    // Half-open "on" interval [0, dash_on).
    return phase < line.dash_on - kEdgeTolerance;
}

bool covers(const Circle& circle, Point p) {
    const double d = std::hypot(p.x1 - circle.center.x1, p.x2 - circle.center.x2);
    if (circle.filled) {
        return d <= circle.radius + kEdgeTolerance;
    }
    return std::abs(d - circle.radius) <= circle.thickness / 2 + kEdgeTolerance;
}

ImageGrid render_scene(const SceneSpec& spec, std::size_t width, std::size_t height) {
    validate(spec);
    ImageGrid img(width, height, spec.background);
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            const Point p = pixel_to_coords(col, row, width, height);
            double v = spec.background;
            for (const Shape& shape : spec.shapes) {
                std::visit(
                    [&](const auto& s) {
                        if (covers(s, p)) {
                            v = s.value;
                        }
                    },
                    shape);
            }
            img.set(col, row, v);
        }
    }
    return img;
}

namespace {

using nlohmann::json;

void require_only(const json& obj, std::initializer_list<const char*> allowed, const char* what) {
    if (!obj.is_object()) {
        throw FormatError(std::string(what) + " must be a JSON object");
    }
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!names.contains(key)) {
            throw FormatError("unknown field '" + key + "' in " + what);
        }
    }
}

double number_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
        throw FormatError(std::string("missing numeric field '") + key + "'");
    }
    return obj.at(key).get<double>();
}

Point point_field(const json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw FormatError(std::string("missing point field '") + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw FormatError(std::string("field '") + key + "' must be [x1, x2]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

json point_json(Point p) { return json::array({p.x1, p.x2}); }

} // namespace

SceneSpec scene_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("scene JSON: ") + e.what());
    }
    require_only(doc, {"background", "shapes"}, "scene");
    SceneSpec spec;
    spec.background = number_field(doc, "background");
    if (doc.contains("shapes")) {
        if (!doc.at("shapes").is_array()) {
            throw FormatError("'shapes' must be an array");
        }
        for (const json& s : doc.at("shapes")) {
            if (!s.is_object() || !s.contains("kind") || !s.at("kind").is_string()) {
                throw FormatError("shape without a 'kind'");
            }
            const std::string kind = s.at("kind").get<std::string>();
            if (kind == "dashed_line") {
                require_only(s, {"kind", "endpoint_a", "endpoint_b", "thickness", "dash_on", "dash_off", "value"},
                             "dashed_line");
                DashedLine line;
                line.endpoint_a = point_field(s, "endpoint_a");
                line.endpoint_b = point_field(s, "endpoint_b");
                line.thickness = number_field(s, "thickness");
                line.dash_on = s.contains("dash_on") ? number_field(s, "dash_on") : 0.0;
                line.dash_off = s.contains("dash_off") ? number_field(s, "dash_off") : 0.0;
                line.value = number_field(s, "value");
                spec.shapes.emplace_back(line);
            } else if (kind == "circle") {
                require_only(s, {"kind", "center", "radius", "thickness", "filled", "value"}, "circle");
                Circle circle;
                circle.center = point_field(s, "center");
                circle.radius = number_field(s, "radius");
                circle.thickness = number_field(s, "thickness");
                if (s.contains("filled")) {
                    if (!s.at("filled").is_boolean()) {
                        throw FormatError("'filled' must be a boolean");
                    }
                    circle.filled = s.at("filled").get<bool>();
                }
                circle.value = number_field(s, "value");
                spec.shapes.emplace_back(circle);
            } else {
                throw FormatError("unknown shape kind '" + kind + "'");
            }
        }
    }
    validate(spec);
    return spec;
}

std::string scene_to_json(const SceneSpec& spec) {
    json shapes = json::array();
    for (const Shape& shape : spec.shapes) {
        if (const auto* line = std::get_if<DashedLine>(&shape)) {
            shapes.push_back({{"kind", "dashed_line"},
                              {"endpoint_a", point_json(line->endpoint_a)},
                              {"endpoint_b", point_json(line->endpoint_b)},
                              {"thickness", line->thickness},
                              {"dash_on", line->dash_on},
                              {"dash_off", line->dash_off},
                              {"value", line->value}});
        } else {
            const auto& c = std::get<Circle>(shape);
            shapes.push_back({{"kind", "circle"},
                              {"center", point_json(c.center)},
                              {"radius", c.radius},
                              {"thickness", c.thickness},
                              {"filled", c.filled},
                              {"value", c.value}});
        }
    }
    return json{{"background", spec.background}, {"shapes", shapes}}.dump(2);
}

SceneSpec builtin_scene(std::string_view name) {
    if (name != "theta_l" && name != "theta_c") {
        throw NameError("unknown builtin scene '" + std::string(name) + "'");
    }
    const double step = 1.0 / 63.0;
    SceneSpec spec;
    spec.background = -0.5;
    for (double x2 : {-0.25, 0.0, 0.25}) {
        DashedLine line;
        line.endpoint_a = {-0.5, x2};
        line.endpoint_b = {0.5, x2};
        line.thickness = 3 * step;
        line.dash_on = 6 * step;
        line.dash_off = 6 * step;
        line.value = 0.5;
        spec.shapes.emplace_back(line);
    }
    if (name == "theta_c") {
        for (Point c : {Point{-0.28, -0.28}, Point{0.28, -0.28}, Point{-0.28, 0.28}, Point{0.28, 0.28}}) {
            Circle circle;
            circle.center = c;
            circle.radius = 8 * step;
            circle.thickness = 3 * step;
            circle.filled = false;
            circle.value = 0.5;
            spec.shapes.emplace_back(circle);
        }
    }
    return spec;
}

Mask builtin_mask(std::size_t size) {
    if (size < 2) {
        throw DegenerateGridError("builtin mask needs at least 2 pixels per axis");
    }
    const auto band = static_cast<std::size_t>(std::lround(static_cast<double>(size) * 26.0 / 64.0));
    const std::size_t first = (size - band) / 2;
    Mask mask(size, size, true);
    for (std::size_t row = 0; row < size; ++row) {
        for (std::size_t col = first; col < first + band; ++col) {
            mask.set(col, row, false);
        }
    }
    return mask;
}

BuiltinData builtin_dataset(std::string_view name, std::size_t size) {
    if (name == "mask") {
        return builtin_mask(size);
    }
    if (name == "theta_l" || name == "theta_c") {
        return render_scene(builtin_scene(name), size, size);
    }
    throw NameError("unknown builtin dataset '" + std::string(name) + "'");
}

} // namespace distgen
