#include "distgen/image.hpp"

#include "distgen/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace distgen {

namespace {

void check_brightness(double v) {
    if (!(v >= -0.5 && v <= 0.5)) {
        throw RangeError("brightness " + std::to_string(v) + " outside [-0.5, 0.5]");
    }
}

} // namespace

ImageGrid::ImageGrid(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height) {
    if (width == 0 || height == 0) {
        throw DimensionError("image dimensions must be at least 1x1");
    }
    check_brightness(fill);
    values_.assign(width * height, fill);
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width == 0 || height == 0) {
        throw DimensionError("image dimensions must be at least 1x1");
    }
    if (values_.size() != width * height) {
        throw DimensionError("value count does not match image dimensions");
    }
    for (double v : values_) {
        check_brightness(v);
    }
}

double ImageGrid::at(std::size_t col, std::size_t row) const {
    if (col >= width_ || row >= height_) {
        throw IndexError("pixel index out of range");
    }
    return values_[row * width_ + col];
}

void ImageGrid::set(std::size_t col, std::size_t row, double v) {
    if (col >= width_ || row >= height_) {
        throw IndexError("pixel index out of range");
    }
    check_brightness(v);
    values_[row * width_ + col] = v;
}

Mask::Mask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), flags_(width * height, fill) {
    if (width == 0 || height == 0) {
        throw DimensionError("mask dimensions must be at least 1x1");
    }
}

Mask::Mask(std::size_t width, std::size_t height, std::vector<bool> flags)
    : width_(width), height_(height), flags_(std::move(flags)) {
    if (width == 0 || height == 0) {
        throw DimensionError("mask dimensions must be at least 1x1");
    }
    if (flags_.size() != width * height) {
        throw DimensionError("flag count does not match mask dimensions");
    }
}

bool Mask::at(std::size_t col, std::size_t row) const {
    if (col >= width_ || row >= height_) {
        throw IndexError("mask index out of range");
    }
    return flags_[row * width_ + col];
}

void Mask::set(std::size_t col, std::size_t row, bool training) {
    if (col >= width_ || row >= height_) {
        throw IndexError("mask index out of range");
    }
    flags_[row * width_ + col] = training;
}

std::size_t Mask::training_count() const {
    std::size_t n = 0;
    for (bool f : flags_) {
        n += f ? 1 : 0;
    }
    return n;
}

Point pixel_to_coords(std::size_t col, std::size_t row, std::size_t width, std::size_t height) {
    if (width < 2 || height < 2) {
        throw DegenerateGridError("coordinate mapping needs at least 2 pixels per axis");
    }
    if (col >= width || row >= height) {
        throw IndexError("pixel (" + std::to_string(col) + ", " + std::to_string(row) +
                         ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
    const double x1 = -0.5 + static_cast<double>(col) / static_cast<double>(width - 1);
    const double x2 = -0.5 + static_cast<double>(height - 1 - row) / static_cast<double>(height - 1);
    return {x1, x2};
}

std::pair<std::size_t, std::size_t> coords_to_pixel(Point p, std::size_t width, std::size_t height) {
    if (width < 2 || height < 2) {
        throw DegenerateGridError("coordinate mapping needs at least 2 pixels per axis");
    }
    const double c = std::round((p.x1 + 0.5) * static_cast<double>(width - 1));
    const double r = std::round((0.5 - p.x2) * static_cast<double>(height - 1));
    if (!(c >= 0.0 && c < static_cast<double>(width) && r >= 0.0 && r < static_cast<double>(height))) {
        throw IndexError("coordinates outside the pixel lattice");
    }
    return {static_cast<std::size_t>(c), static_cast<std::size_t>(r)};
}

double byte_to_brightness(int v) {
    if (v < 0 || v > 255) {
        throw RangeError("byte value " + std::to_string(v) + " outside 0..255");
    }
    return static_cast<double>(v) / 255.0 - 0.5;
}

std::uint8_t brightness_to_byte(double y) {
    if (!std::isfinite(y)) {
        throw NonFiniteError("non-finite brightness");
    }
    const double clamped = std::clamp(y, -0.5, 0.5);
    // std::round rounds half away from zero.
    return static_cast<std::uint8_t>(std::round((clamped + 0.5) * 255.0));
}

Split split_by_mask(const ImageGrid& data, const Mask& mask) {
    if (data.width() != mask.width() || data.height() != mask.height()) {
        throw DimensionError("mask dimensions differ from dataset dimensions");
    }
    Split out;
    for (std::size_t row = 0; row < data.height(); ++row) {
        for (std::size_t col = 0; col < data.width(); ++col) {
            const Point p = pixel_to_coords(col, row, data.width(), data.height());
            Sample s{p.x1, p.x2, data.at(col, row)};
            (mask.at(col, row) ? out.train : out.test).push_back(s);
        }
    }
    if (out.train.empty()) {
        throw EmptyTrainingError("mask selects no training pixels");
    }
    return out;
}

std::vector<std::uint8_t> encode_pgm(const ImageGrid& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + img.size());
    for (double v : img.values()) {
        bytes.push_back(brightness_to_byte(v));
    }
    return bytes;
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::string token() {
        skip_space_and_comments();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
            t.push_back(static_cast<char>(bytes_[pos_++]));
        }
        if (t.empty()) {
            throw FormatError("truncated PGM header");
        }
        return t;
    }

    std::size_t number() {
        const std::string t = token();
        std::size_t v = 0;
        for (char ch : t) {
            if (!std::isdigit(static_cast<unsigned char>(ch))) {
                throw FormatError("bad number '" + t + "' in PGM header");
            }
            v = v * 10 + static_cast<std::size_t>(ch - '0');
            if (v > (1u << 24)) {
                throw FormatError("PGM dimension too large");
            }
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError("missing whitespace after PGM maxval");
        }
        ++pos_;
    }

    std::size_t position() const { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace

ImageGrid decode_pgm(const std::vector<std::uint8_t>& bytes) {
    HeaderReader reader(bytes);
    if (reader.token() != "P5") {
        throw FormatError("not a binary PGM (expected magic P5)");
    }
    const std::size_t width = reader.number();
    const std::size_t height = reader.number();
    const std::size_t maxval = reader.number();
    if (width == 0 || height == 0) {
        throw FormatError("PGM has zero width or height");
    }
    if (maxval != 255) {
        throw FormatError("PGM maxval must be 255, got " + std::to_string(maxval));
    }
    reader.single_space();
    const std::size_t offset = reader.position();
    if (bytes.size() - offset < width * height) {
        throw FormatError("truncated PGM payload");
    }
    std::vector<double> values(width * height);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = byte_to_brightness(bytes[offset + i]);
    }
    return ImageGrid(width, height, std::move(values));
}

ImageGrid load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_pgm(bytes);
}

void save_pgm(const ImageGrid& img, const std::filesystem::path& path) {
    const auto bytes = encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Mask mask_from_image(const ImageGrid& img) {
    Mask m(img.width(), img.height());
    for (std::size_t row = 0; row < img.height(); ++row) {
        for (std::size_t col = 0; col < img.width(); ++col) {
            m.set(col, row, brightness_to_byte(img.at(col, row)) < 128);
        }
    }
    return m;
}

ImageGrid mask_to_image(const Mask& mask) {
    ImageGrid img(mask.width(), mask.height(), 0.5);
    for (std::size_t row = 0; row < mask.height(); ++row) {
        for (std::size_t col = 0; col < mask.width(); ++col) {
            if (mask.at(col, row)) {
                img.set(col, row, -0.5);
            }
        }
    }
    return img;
}

} // namespace distgen
