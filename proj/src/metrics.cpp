#include "distgen/metrics.hpp"

#include "distgen/errors.hpp"
#include "distgen/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace distgen {

RegionReport masked_mse(const ImageGrid& pred, const ImageGrid& truth, const Mask& mask) {
    if (pred.width() != truth.width() || pred.height() != truth.height() || mask.width() != pred.width() ||
        mask.height() != pred.height()) {
        throw DimensionError("prediction, truth and mask dimensions must match");
    }
    double sse[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    const auto& p = pred.values();
    const auto& t = truth.values();
    const auto& flags = mask.flags();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int region = flags[i] ? 0 : 1;
        const double e = p[i] - t[i];
        sse[region] += e * e;
        ++count[region];
    }
    RegionReport r;
    r.train_count = count[0];
    r.test_count = count[1];
    r.train_mse = count[0] ? sse[0] / static_cast<double>(count[0]) : 0.0;
    r.test_mse = count[1] ? sse[1] / static_cast<double>(count[1]) : 0.0;
    return r;
}

NuPropertyReport nu_property_report(const SvmModel& model, const LabeledSet& data, double nu) {
    if (model.support_points.empty()) {
        throw EmptyModelError("model has no support vectors");
    }
    if (data.size() == 0) {
        throw DimensionError("empty labeled set");
    }
    const double l = static_cast<double>(data.size());
    std::size_t wrong_side = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] * model.decision(data.points[i]) < 0.0) {
            ++wrong_side;
        }
    }
    std::size_t bounded = 0;
    if (std::isfinite(model.upper_bound)) {
        for (double c : model.coefficients) {
            bounded += std::abs(c) >= model.upper_bound ? 1 : 0;
        }
    }
    const double cost = std::isfinite(model.upper_bound) ? model.upper_bound * l : 1.0;
    const double nu_eff = nu / cost;

    NuPropertyReport r;
    r.margin_error_fraction = static_cast<double>(wrong_side) / l;
    r.bounded_fraction = static_cast<double>(bounded) / l;
    r.sv_fraction = static_cast<double>(model.support_points.size()) / l;
    r.holds = r.bounded_fraction <= nu_eff + 1.0 / l && r.sv_fraction >= nu_eff - 1.0 / l;
    return r;
}

namespace {

std::vector<NamedReport> disambiguated(const std::vector<NamedReport>& reports) {
    std::vector<NamedReport> out;
    std::map<std::string, int> seen;
    for (const auto& [name, report] : reports) {
        const int n = ++seen[name];
        out.emplace_back(n == 1 ? name : name + "#" + std::to_string(n), report);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

std::string printf_string(const char* fmt, auto... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string s(static_cast<std::size_t>(n), '\0');
    std::snprintf(s.data(), s.size() + 1, fmt, args...);
    return s;
}

} // namespace

std::string compare_report(const std::vector<NamedReport>& reports) {
    const auto rows = disambiguated(reports);
    int name_width = 7;
    for (const auto& [name, _] : rows) {
        name_width = std::max(name_width, static_cast<int>(name.size()));
    }
    std::string out = printf_string("%-*s  %14s  %14s  %11s  %11s\n", name_width, "machine", "train_mse", "test_mse",
                                    "train_count", "test_count");
    for (const auto& [name, r] : rows) {
        out += printf_string("%-*s  %14.6e  %14.6e  %11zu  %11zu\n", name_width, name.c_str(), r.train_mse,
                             r.test_mse, r.train_count, r.test_count);
    }
    return out;
}

std::string compare_csv(const std::vector<NamedReport>& reports) {
    std::string out = "name,train_mse,test_mse,train_count,test_count\n";
    for (const auto& [name, r] : disambiguated(reports)) {
        out += name + ',' + format_double(r.train_mse) + ',' + format_double(r.test_mse) + ',' +
               std::to_string(r.train_count) + ',' + std::to_string(r.test_count) + '\n';
    }
    return out;
}

} // namespace distgen
