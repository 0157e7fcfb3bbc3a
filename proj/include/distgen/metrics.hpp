#pragma once

#include "distgen/image.hpp"
#include "distgen/svm.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace distgen {

/// Mean squared brightness error over the training and the unknown pixels.
/// An empty region reports MSE 0 with count 0.
struct RegionReport {
    double train_mse = 0.0;
    double test_mse = 0.0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;

    bool train_empty() const { return train_count == 0; }
    bool test_empty() const { return test_count == 0; }
};

RegionReport masked_mse(const ImageGrid& pred, const ImageGrid& truth, const Mask& mask);

struct NuPropertyReport {
    /// Fraction of training points with y * f(x) < 0.
    double margin_error_fraction = 0.0;
    /// Fraction of training points whose alpha sits on the box bound.
    double bounded_fraction = 0.0;
    double sv_fraction = 0.0;
    bool holds = false;
};

/// Checks bounded_fraction <= nu' + 1/l and sv_fraction >= nu' - 1/l where
/// nu' = nu / cost (cost recovered from the model's box bound; nu' = nu for
/// the textbook dual).
NuPropertyReport nu_property_report(const SvmModel& model, const LabeledSet& data, double nu);

using NamedReport = std::pair<std::string, RegionReport>;

/// Fixed-width table sorted by name; repeated names get "#2", "#3", ...
std::string compare_report(const std::vector<NamedReport>& reports);

/// name,train_mse,test_mse,train_count,test_count
std::string compare_csv(const std::vector<NamedReport>& reports);

} // namespace distgen
