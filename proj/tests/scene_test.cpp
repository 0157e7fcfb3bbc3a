#include <gtest/gtest.h>

#include "distgen/errors.hpp"
#include "distgen/scene.hpp"

#include <cstdlib>
#include <queue>

using namespace distgen;

namespace {

// Pixel centres of a 64x64 grid sit at (2c - 63)/126 and (63 - 2r)/126, so
// coverage questions reduce to integer comparisons.
int twice63_x(int col) { return 2 * col - 63; }
int twice63_y(int row) { return 63 - 2 * row; }

std::size_t count_value(const ImageGrid& img, double v) {
    std::size_t n = 0;
    for (double x : img.values()) {
        n += x == v ? 1 : 0;
    }
    return n;
}

} // namespace

TEST(RenderScene, EmptySceneIsUniformBackground) {
    const ImageGrid img = render_scene(SceneSpec{-0.5, {}}, 64, 64);
    EXPECT_EQ(count_value(img, -0.5), 64u * 64u);
}

TEST(RenderScene, SolidLineCoversRowsWithinHalfThickness) {
    // Centre row 20 exactly, thickness just under one pixel step.
    const double x2 = twice63_y(20) / 126.0;
    DashedLine line{{-0.5, x2}, {0.5, x2}, 0.9 / 63.0, 0.0, 0.0, 0.5};
    const ImageGrid img = render_scene(SceneSpec{-0.5, {line}}, 64, 64);
    for (int row = 0; row < 64; ++row) {
        for (int col = 0; col < 64; ++col) {
            ASSERT_EQ(img.at(col, row), row == 20 ? 0.5 : -0.5) << col << "," << row;
        }
    }
}

TEST(RenderScene, SolidLineThroughZeroMatchesBruteForce) {
    // Thickness 1/63 centred between rows 31 and 32: |63 - 2r| <= 1.
    DashedLine line{{-0.5, 0.0}, {0.5, 0.0}, 1.0 / 63.0, 0.0, 0.0, 0.5};
    const ImageGrid img = render_scene(SceneSpec{-0.5, {line}}, 64, 64);
    for (int row = 0; row < 64; ++row) {
        const bool expected = std::abs(twice63_y(row)) <= 1;
        for (int col = 0; col < 64; ++col) {
            ASSERT_EQ(img.at(col, row) == 0.5, expected) << col << "," << row;
        }
    }
}

TEST(RenderScene, FilledCircleMatchesBruteForceCount) {
    Circle disc{{0.0, 0.0}, 0.1, 0.01, true, 0.5};
    const ImageGrid img = render_scene(SceneSpec{-0.5, {disc}}, 64, 64);
    // x1^2 + x2^2 <= 0.01  <=>  a^2 + b^2 <= 0.01 * 126^2 = 158.76
    std::size_t expected = 0;
    for (int row = 0; row < 64; ++row) {
        for (int col = 0; col < 64; ++col) {
            const int a = twice63_x(col);
            const int b = twice63_y(row);
            const bool inside = a * a + b * b <= 158;
            expected += inside ? 1 : 0;
            ASSERT_EQ(img.at(col, row) == 0.5, inside);
        }
    }
    EXPECT_EQ(expected, 120u);
    EXPECT_EQ(count_value(img, 0.5), expected);
}

TEST(RenderScene, RingExcludesCentre) {
    Circle ring{{0.0, 0.0}, 0.2, 0.05, false, 0.5};
    const ImageGrid img = render_scene(SceneSpec{-0.5, {ring}}, 64, 64);
    EXPECT_EQ(img.at(31, 31), -0.5);
    EXPECT_GT(count_value(img, 0.5), 0u);
}

TEST(RenderScene, DashPatternStartsOnAtEndpointA) {
    // theta_l centre line: 6 pixel-steps on, 6 off, starting at x1 = -0.5.
    const ImageGrid img = std::get<ImageGrid>(builtin_dataset("theta_l"));
    for (int col = 0; col < 64; ++col) {
        EXPECT_EQ(img.at(col, 31) == 0.5, col % 12 < 6) << col;
    }
}

TEST(RenderScene, LastShapeWins) {
    Circle a{{0.0, 0.0}, 0.3, 0.01, true, 0.5};
    Circle b{{0.0, 0.0}, 0.1, 0.01, true, 0.0};
    const ImageGrid img = render_scene(SceneSpec{-0.5, {a, b}}, 64, 64);
    EXPECT_EQ(img.at(31, 31), 0.0);
    const ImageGrid swapped = render_scene(SceneSpec{-0.5, {b, a}}, 64, 64);
    EXPECT_EQ(swapped.at(31, 31), 0.5);
}

TEST(RenderScene, DeterministicAndIdempotent) {
    const SceneSpec spec = builtin_scene("theta_c");
    EXPECT_EQ(render_scene(spec, 64, 64), render_scene(spec, 64, 64));
}

TEST(RenderScene, InvalidSpecs) {
    EXPECT_THROW(render_scene(SceneSpec{-0.5, {DashedLine{{0, 0}, {1, 0}, 0.0, 0, 0, 0.5}}}, 8, 8), RangeError);
    EXPECT_THROW(render_scene(SceneSpec{-0.5, {DashedLine{{0, 0}, {1, 0}, 0.1, 0.0, 0.2, 0.5}}}, 8, 8), RangeError);
    EXPECT_THROW(render_scene(SceneSpec{-0.5, {Circle{{0, 0}, 0.0, 0.1, false, 0.5}}}, 8, 8), RangeError);
    EXPECT_THROW(render_scene(SceneSpec{0.9, {}}, 8, 8), RangeError);
}

TEST(Builtin, ThetaLHasThreeDashedLines) {
    const SceneSpec spec = builtin_scene("theta_l");
    ASSERT_EQ(spec.shapes.size(), 3u);
    for (const auto& s : spec.shapes) {
        const auto* line = std::get_if<DashedLine>(&s);
        ASSERT_NE(line, nullptr);
        EXPECT_GT(line->dash_off, 0.0);
    }
    const ImageGrid img = std::get<ImageGrid>(builtin_dataset("theta_l"));
    EXPECT_EQ(img.width(), 64u);
    EXPECT_EQ(img.height(), 64u);
}

TEST(Builtin, GeometryIsFixedInDataCoordinates) {
    const SceneSpec spec = builtin_scene("theta_c");
    const auto& line = std::get<DashedLine>(spec.shapes[1]);
    EXPECT_EQ(line.endpoint_a.x1, -0.5);
    EXPECT_EQ(line.endpoint_a.x2, 0.0);
    EXPECT_DOUBLE_EQ(line.thickness, 3.0 / 63.0);
    EXPECT_DOUBLE_EQ(line.dash_on, 6.0 / 63.0);
    EXPECT_DOUBLE_EQ(line.dash_off, 6.0 / 63.0);
    const auto& circle = std::get<Circle>(spec.shapes[3]);
    EXPECT_DOUBLE_EQ(circle.radius, 8.0 / 63.0);
    EXPECT_EQ(std::abs(circle.center.x1), 0.28);
    EXPECT_FALSE(circle.filled);
    // A coarser grid rasterizes the same picture: the 32 x 32 centre dashes
    // are half as many pixels long.
    const ImageGrid small = std::get<ImageGrid>(builtin_dataset("theta_l", 32));
    EXPECT_EQ(small.width(), 32u);
    EXPECT_EQ(small.at(0, 15), 0.5);
    EXPECT_EQ(small.at(3, 15), -0.5);
}

TEST(Builtin, ThetaCAddsFourCircles) {
    const SceneSpec spec = builtin_scene("theta_c");
    ASSERT_EQ(spec.shapes.size(), 7u);
    std::size_t circles = 0;
    for (const auto& s : spec.shapes) {
        circles += std::holds_alternative<Circle>(s) ? 1 : 0;
    }
    EXPECT_EQ(circles, 4u);
    EXPECT_EQ(std::get<ImageGrid>(builtin_dataset("theta_c")), std::get<ImageGrid>(builtin_dataset("theta_c")));
}

TEST(Builtin, MaskUnknownRegionIsOneLargeConnectedBlock) {
    const Mask mask = std::get<Mask>(builtin_dataset("mask"));
    ASSERT_EQ(mask.width(), 64u);
    const std::size_t unknown = 64 * 64 - mask.training_count();
    EXPECT_GE(static_cast<double>(unknown), 0.3 * 64 * 64);

    // Flood fill from the first unknown pixel must reach all of them.
    std::vector<bool> seen(64 * 64, false);
    std::queue<std::pair<int, int>> todo;
    for (int i = 0; i < 64 * 64 && todo.empty(); ++i) {
        if (!mask.flags()[i]) {
            todo.push({i % 64, i / 64});
            seen[i] = true;
        }
    }
    std::size_t reached = 0;
    while (!todo.empty()) {
        const auto [c, r] = todo.front();
        todo.pop();
        ++reached;
        const int dc[] = {1, -1, 0, 0};
        const int dr[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nc = c + dc[k];
            const int nr = r + dr[k];
            if (nc < 0 || nr < 0 || nc >= 64 || nr >= 64) {
                continue;
            }
            const int idx = nr * 64 + nc;
            if (!mask.flags()[idx] && !seen[idx]) {
                seen[idx] = true;
                todo.push({nc, nr});
            }
        }
    }
    EXPECT_EQ(reached, unknown);
}

TEST(Builtin, MaskBandIsTwentySixCentredColumns) {
    const Mask mask = builtin_mask(64);
    for (std::size_t col = 0; col < 64; ++col) {
        EXPECT_EQ(mask.at(col, 10), !(col >= 19 && col < 45)) << col;
    }
}

TEST(Builtin, UnknownName) {
    EXPECT_THROW(builtin_dataset("theta_x"), NameError);
    EXPECT_THROW(builtin_scene("mask"), NameError);
}

TEST(SceneJson, RoundTripRendersIdentically) {
    const SceneSpec spec = builtin_scene("theta_c");
    const SceneSpec back = scene_from_json(scene_to_json(spec));
    EXPECT_EQ(render_scene(back, 64, 64), render_scene(spec, 64, 64));
}

TEST(SceneJson, ParsesBothShapeKinds) {
    const SceneSpec spec = scene_from_json(R"({
        "background": -0.5,
        "shapes": [
          {"kind": "dashed_line", "endpoint_a": [-0.5, 0], "endpoint_b": [0.5, 0], "thickness": 0.05, "value": 0.5},
          {"kind": "circle", "center": [0.1, 0.2], "radius": 0.1, "thickness": 0.02, "filled": true, "value": 0.25}
        ]})");
    ASSERT_EQ(spec.shapes.size(), 2u);
    const auto& line = std::get<DashedLine>(spec.shapes[0]);
    EXPECT_EQ(line.dash_off, 0.0);
    const auto& circle = std::get<Circle>(spec.shapes[1]);
    EXPECT_TRUE(circle.filled);
    EXPECT_EQ(circle.center.x2, 0.2);
}

TEST(SceneJson, Rejections) {
    EXPECT_THROW(scene_from_json("{"), FormatError);
    EXPECT_THROW(scene_from_json(R"({"background": -0.5, "extra": 1})"), FormatError);
    EXPECT_THROW(scene_from_json(R"({"background": -0.5, "shapes": [{"kind": "square"}]})"), FormatError);
    EXPECT_THROW(
        scene_from_json(R"({"background": -0.5, "shapes": [{"kind": "circle", "center": [0, 0], "radius": -1,
                            "thickness": 0.1, "value": 0.5}]})"),
        RangeError);
}
