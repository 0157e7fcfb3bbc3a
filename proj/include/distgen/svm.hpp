#pragma once

#include "distgen/image.hpp"
#include "distgen/introspect.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace distgen {

struct LabeledSet {
    std::vector<Point> points;
    /// +1 or -1 per point.
    std::vector<int> labels;

    std::size_t size() const { return points.size(); }
    std::size_t count(int label) const;
};

/// Labels a pixel +1 when (brightness + 0.5) >= threshold_raw, else -1.
LabeledSet binarize(const ImageGrid& data, double threshold_raw);
/// As above, emitting only the mask's training pixels.
LabeledSet binarize(const ImageGrid& data, double threshold_raw, const Mask& mask);

/// exp(-gamma * |x - z|^2)
double rbf_kernel(Point x, Point z, double gamma);

struct NuSvcConfig {
    double nu = 0.2;
    double gamma = 1.0;
    /// Scales the per-variable box to [0, cost / l]; cost = 1 is the textbook
    /// nu-SVC dual.
    double cost = 1.0;
    /// Stopping threshold on the maximal violating pair, measured on the
    /// unit-box scaling used by LIBSVM.
    double epsilon = 1e-3;
    std::uint64_t max_iterations = 10'000'000;
};

void validate(const NuSvcConfig& config);

struct SvmModel {
    std::vector<Point> support_points;
    /// alpha_i * y_i for every support vector.
    std::vector<double> coefficients;
    double bias = 0.0;
    double gamma = 1.0;
    /// Functional margin rho: y * f(x) == rho on free support vectors.
    double margin = 1.0;
    /// Box bound cost / l on each alpha; infinite when unknown.
    double upper_bound = std::numeric_limits<double>::infinity();
    /// Number of training points the model was solved on; 0 when unknown.
    std::size_t training_size = 0;

    /// sum_i coefficient_i * K(sv_i, x) + bias
    double decision(Point x) const;
};

struct NuSvcResult {
    SvmModel model;
    /// Dual variables, one per training point, in [0, cost / l].
    std::vector<double> alpha;
    /// 1/2 * alpha' Q alpha with Q_ij = y_i y_j K(x_i, x_j).
    double objective = 0.0;
    std::uint64_t iterations = 0;
    /// Maximal violating pair gap at termination (unit-box scaling).
    double kkt_gap = 0.0;
};

/// Minimizes 1/2 a'Qa subject to 0 <= a_i <= cost/l, sum a_i y_i = 0 and
/// sum a_i = nu with a working-set pair method that keeps both equality
/// constraints satisfied at every step.
NuSvcResult solve_nu_svc(const LabeledSet& data, const NuSvcConfig& config);

/// clamp(f / (2 * margin), -0.5, 0.5) at pixel centres.
ImageGrid decision_grid(const SvmModel& model, std::size_t width, std::size_t height,
                        const Viewport& vp = Viewport::data());
/// sign(f) mapped to +-0.5; f == 0 maps to +0.5.
ImageGrid binary_decision_grid(const SvmModel& model, std::size_t width, std::size_t height,
                               const Viewport& vp = Viewport::data());

std::string svm_model_to_text(const SvmModel& model);
SvmModel svm_model_from_text(const std::string& text);
void save_svm_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm_model(const std::filesystem::path& path);

} // namespace distgen
