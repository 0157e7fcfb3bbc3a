#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace distgen {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Row-major grid of signed brightness values in [-0.5, 0.5]; row 0 is the
/// top image row.
class ImageGrid {
public:
    ImageGrid(std::size_t width, std::size_t height, double fill = -0.5);
    ImageGrid(std::size_t width, std::size_t height, std::vector<double> values);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return values_.size(); }

    double at(std::size_t col, std::size_t row) const;
    /// Stores v; throws RangeError outside [-0.5, 0.5].
    void set(std::size_t col, std::size_t row, double v);

    const std::vector<double>& values() const { return values_; }

    bool operator==(const ImageGrid&) const = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> values_;
};

/// Training-membership flags; true marks a training pixel.
class Mask {
public:
    Mask(std::size_t width, std::size_t height, bool fill = false);
    Mask(std::size_t width, std::size_t height, std::vector<bool> flags);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool at(std::size_t col, std::size_t row) const;
    void set(std::size_t col, std::size_t row, bool training);
    const std::vector<bool>& flags() const { return flags_; }
    std::size_t training_count() const;

    bool operator==(const Mask&) const = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<bool> flags_;
};

struct Sample {
    double x1 = 0.0;
    double x2 = 0.0;
    double y = 0.0;
};

using SampleSet = std::vector<Sample>;

struct Split {
    SampleSet train;
    SampleSet test;
};

/// Maps a pixel index to input coordinates. The lower-left pixel lands on
/// (-0.5, -0.5) and the upper-right on (0.5, 0.5).
Point pixel_to_coords(std::size_t col, std::size_t row, std::size_t width, std::size_t height);

/// Inverse of pixel_to_coords for lattice points.
std::pair<std::size_t, std::size_t> coords_to_pixel(Point p, std::size_t width, std::size_t height);

double byte_to_brightness(int v);

/// Clamps to [-0.5, 0.5] and rounds half away from zero.
std::uint8_t brightness_to_byte(double y);

Split split_by_mask(const ImageGrid& data, const Mask& mask);

ImageGrid load_pgm(const std::filesystem::path& path);
void save_pgm(const ImageGrid& img, const std::filesystem::path& path);

/// Encodes as a binary P5 file body; save_pgm writes exactly these bytes.
std::vector<std::uint8_t> encode_pgm(const ImageGrid& img);
ImageGrid decode_pgm(const std::vector<std::uint8_t>& bytes);

/// Dark pixels (byte < 128) are training pixels.
Mask mask_from_image(const ImageGrid& img);
/// Training pixels become black, the rest white.
ImageGrid mask_to_image(const Mask& mask);

} // namespace distgen
