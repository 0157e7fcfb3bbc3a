#include "distgen/svm.hpp"

#include "distgen/errors.hpp"
#include "distgen/mlp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace distgen {

std::size_t LabeledSet::count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

namespace {

LabeledSet binarize_impl(const ImageGrid& data, double threshold_raw, const Mask* mask) {
    if (!(threshold_raw >= 0.0 && threshold_raw <= 1.0)) {
        throw RangeError("binarization threshold must lie in [0, 1]");
    }
    if (mask && (mask->width() != data.width() || mask->height() != data.height())) {
        throw DimensionError("mask dimensions differ from dataset dimensions");
    }
    LabeledSet out;
    for (std::size_t row = 0; row < data.height(); ++row) {
        for (std::size_t col = 0; col < data.width(); ++col) {
            if (mask && !mask->at(col, row)) {
                continue;
            }
            out.points.push_back(pixel_to_coords(col, row, data.width(), data.height()));
            out.labels.push_back(data.at(col, row) + 0.5 >= threshold_raw ? 1 : -1);
        }
    }
    if (out.count(1) == 0 || out.count(-1) == 0) {
        throw SingleClassError("binarized set contains a single class");
    }
    return out;
}

} // namespace

LabeledSet binarize(const ImageGrid& data, double threshold_raw) { return binarize_impl(data, threshold_raw, nullptr); }

LabeledSet binarize(const ImageGrid& data, double threshold_raw, const Mask& mask) {
    return binarize_impl(data, threshold_raw, &mask);
}

double rbf_kernel(Point x, Point z, double gamma) {
    const double d1 = x.x1 - z.x1;
    const double d2 = x.x2 - z.x2;
    return std::exp(-gamma * (d1 * d1 + d2 * d2));
}

void validate(const NuSvcConfig& config) {
    if (!(config.nu > 0.0 && config.nu < 1.0)) {
        throw RangeError("nu must lie in (0, 1)");
    }
    if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) {
        throw RangeError("gamma must be positive");
    }
    if (!(config.cost > 0.0) || !std::isfinite(config.cost)) {
        throw RangeError("cost must be positive");
    }
    if (!(config.epsilon > 0.0)) {
        throw RangeError("epsilon must be positive");
    }
    if (config.max_iterations == 0) {
        throw RangeError("max_iterations must be positive");
    }
}

double SvmModel::decision(Point x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_points.size(); ++i) {
        f += coefficients[i] * rbf_kernel(support_points[i], x, gamma);
    }
    return f;
}

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Pairwise working-set solver in LIBSVM's scaling: beta_i in [0, cost],
// class sums nu*l/2. Pairs are always taken within one class, which keeps
// both equality constraints invariant.
class NuSolver {
public:
    NuSolver(const LabeledSet& data, const NuSvcConfig& config)
        : n_(data.size()), y_(data.labels), cost_(config.cost), eps_(config.epsilon) {
        kernel_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i) {
            kernel_[i * n_ + i] = 1.0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double k = rbf_kernel(data.points[i], data.points[j], config.gamma);
                kernel_[i * n_ + j] = k;
                kernel_[j * n_ + i] = k;
            }
        }
        beta_.assign(n_, 0.0);
        const double half = config.nu * static_cast<double>(n_) / 2.0;
        double remaining_pos = half;
        double remaining_neg = half;
        for (std::size_t i = 0; i < n_; ++i) {
            double& remaining = y_[i] > 0 ? remaining_pos : remaining_neg;
            beta_[i] = std::min(cost_, remaining);
            remaining -= beta_[i];
        }
        grad_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            if (beta_[i] == 0.0) {
                continue;
            }
            for (std::size_t k = 0; k < n_; ++k) {
                grad_[k] += q(k, i) * beta_[i];
            }
        }
    }

    std::uint64_t run(std::uint64_t max_iterations) {
        std::uint64_t it = 0;
        for (;;) {
            std::size_t i = 0;
            std::size_t j = 0;
            if (!select(i, j)) {
                return it;
            }
            if (it == max_iterations) {
                throw NonConvergenceError("nu-SVC solver hit max_iterations=" + std::to_string(max_iterations) +
                                              " with KKT gap " + std::to_string(gap_),
                                          gap_);
            }
            ++it;
            update(i, j);
        }
    }

    double gap() const { return gap_; }
    const std::vector<double>& beta() const { return beta_; }
    const std::vector<double>& grad() const { return grad_; }
    bool at_upper(std::size_t t) const { return beta_[t] >= cost_; }
    bool at_lower(std::size_t t) const { return beta_[t] <= 0.0; }
    double kernel(std::size_t i, std::size_t j) const { return kernel_[i * n_ + j]; }

    /// Returns (r1, r2): mean gradient over free points of each class, or the
    /// midpoint of the feasible interval when a class has no free point.
    std::pair<double, double> class_levels() const {
        double ub[2] = {kInf, kInf};
        double lb[2] = {-kInf, -kInf};
        double sum[2] = {0.0, 0.0};
        std::size_t free[2] = {0, 0};
        for (std::size_t t = 0; t < n_; ++t) {
            const int c = y_[t] > 0 ? 0 : 1;
            if (at_upper(t)) {
                lb[c] = std::max(lb[c], grad_[t]);
            } else if (at_lower(t)) {
                ub[c] = std::min(ub[c], grad_[t]);
            } else {
                ++free[c];
                sum[c] += grad_[t];
            }
        }
        const auto level = [&](int c) {
            return free[c] > 0 ? sum[c] / static_cast<double>(free[c]) : (ub[c] + lb[c]) / 2.0;
        };
        return {level(0), level(1)};
    }

private:
    double q(std::size_t i, std::size_t j) const { return static_cast<double>(y_[i] * y_[j]) * kernel_[i * n_ + j]; }

    // Second-order maximal-violating-pair selection restricted to one class.
    // Ties go to the lowest index.
    bool select(std::size_t& out_i, std::size_t& out_j) {
        double gmax_pos = -kInf;
        double gmax_neg = -kInf;
        std::size_t imax_pos = n_;
        std::size_t imax_neg = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] > 0) {
                if (!at_upper(t) && -grad_[t] > gmax_pos) {
                    gmax_pos = -grad_[t];
                    imax_pos = t;
                }
            } else if (!at_lower(t) && grad_[t] > gmax_neg) {
                gmax_neg = grad_[t];
                imax_neg = t;
            }
        }

        double gmax2_pos = -kInf;
        double gmax2_neg = -kInf;
        std::size_t best_j = n_;
        double best_obj = kInf;
        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] > 0) {
                if (at_lower(t)) {
                    continue;
                }
                gmax2_pos = std::max(gmax2_pos, grad_[t]);
                const double diff = gmax_pos + grad_[t];
                if (imax_pos < n_ && diff > 0.0) {
                    double quad = 2.0 - 2.0 * kernel(imax_pos, t);
                    if (quad <= 0.0) {
                        quad = kTau;
                    }
                    const double obj = -(diff * diff) / quad;
                    if (obj < best_obj) {
                        best_obj = obj;
                        best_j = t;
                    }
                }
            } else {
                if (at_upper(t)) {
                    continue;
                }
                gmax2_neg = std::max(gmax2_neg, -grad_[t]);
                const double diff = gmax_neg - grad_[t];
                if (imax_neg < n_ && diff > 0.0) {
                    double quad = 2.0 - 2.0 * kernel(imax_neg, t);
                    if (quad <= 0.0) {
                        quad = kTau;
                    }
                    const double obj = -(diff * diff) / quad;
                    if (obj < best_obj) {
                        best_obj = obj;
                        best_j = t;
                    }
                }
            }
        }
        gap_ = std::max(gmax_pos + gmax2_pos, gmax_neg + gmax2_neg);
        if (gap_ < eps_ || best_j == n_) {
            return false;
        }
        out_i = y_[best_j] > 0 ? imax_pos : imax_neg;
        out_j = best_j;
        return true;
    }

    void update(std::size_t i, std::size_t j) {
        const double old_i = beta_[i];
        const double old_j = beta_[j];
        double quad = 2.0 - 2.0 * kernel(i, j);
        if (quad <= 0.0) {
            quad = kTau;
        }
        const double delta = (grad_[i] - grad_[j]) / quad;
        const double sum = old_i + old_j;
        double bi = old_i - delta;
        double bj = old_j + delta;
        if (sum > cost_) {
            if (bi > cost_) {
                bi = cost_;
                bj = sum - cost_;
            }
        } else if (bj < 0.0) {
            bj = 0.0;
            bi = sum;
        }
        if (sum > cost_) {
            if (bj > cost_) {
                bj = cost_;
                bi = sum - cost_;
            }
        } else if (bi < 0.0) {
            bi = 0.0;
            bj = sum;
        }
        beta_[i] = bi;
        beta_[j] = bj;
        const double di = bi - old_i;
        const double dj = bj - old_j;
        for (std::size_t k = 0; k < n_; ++k) {
            grad_[k] += q(k, i) * di + q(k, j) * dj;
        }
    }

    std::size_t n_;
    std::vector<int> y_;
    double cost_;
    double eps_;
    std::vector<double> kernel_;
    std::vector<double> beta_;
    std::vector<double> grad_;
    double gap_ = kInf;
};

} // namespace

NuSvcResult solve_nu_svc(const LabeledSet& data, const NuSvcConfig& config) {
    validate(config);
    if (data.points.size() != data.labels.size()) {
        throw DimensionError("points and labels differ in length");
    }
    if (data.size() < 2) {
        throw SingleClassError("nu-SVC needs at least two points");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] != 1 && data.labels[i] != -1) {
            throw RangeError("labels must be +1 or -1");
        }
        if (!std::isfinite(data.points[i].x1) || !std::isfinite(data.points[i].x2)) {
            throw NonFiniteError("non-finite training point");
        }
    }
    const std::size_t positives = data.count(1);
    const std::size_t negatives = data.count(-1);
    if (positives == 0 || negatives == 0) {
        throw SingleClassError("nu-SVC needs both classes");
    }
    const double l = static_cast<double>(data.size());
    if (config.nu * l / 2.0 > static_cast<double>(std::min(positives, negatives)) * config.cost) {
        throw InfeasibleError("nu=" + format_double(config.nu) + " is infeasible: nu*l/2 exceeds cost * smaller class (" +
                              std::to_string(std::min(positives, negatives)) + ")");
    }

    NuSolver solver(data, config);
    NuSvcResult result;
    result.iterations = solver.run(config.max_iterations);
    result.kkt_gap = solver.gap();

    const auto [r_pos, r_neg] = solver.class_levels();
    const double rho_scaled = (r_pos + r_neg) / 2.0;
    const double bias_scaled = (r_neg - r_pos) / 2.0;

    const double upper = config.cost / l;
    result.alpha.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double a = solver.beta()[i] / l;
        if (a < 1e-12) {
            a = 0.0;
        } else if (upper - a < 1e-12) {
            a = upper;
        }
        result.alpha[i] = a;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        obj += result.alpha[i] * solver.grad()[i] / l;
    }
    result.objective = 0.5 * obj;

    SvmModel& model = result.model;
    model.gamma = config.gamma;
    model.bias = bias_scaled / l;
    model.margin = rho_scaled / l;
    model.upper_bound = upper;
    model.training_size = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (result.alpha[i] > 0.0) {
            model.support_points.push_back(data.points[i]);
            model.coefficients.push_back(result.alpha[i] * data.labels[i]);
        }
    }
    return result;
}

namespace {

double display_scale(const SvmModel& model) {
    return model.margin > 0.0 && std::isfinite(model.margin) ? model.margin : 1.0;
}

} // namespace

ImageGrid decision_grid(const SvmModel& model, std::size_t width, std::size_t height, const Viewport& vp) {
    const double scale = 2.0 * display_scale(model);
    return eval_grid([&](double x1, double x2) { return model.decision({x1, x2}) / scale; }, width, height, vp);
}

ImageGrid binary_decision_grid(const SvmModel& model, std::size_t width, std::size_t height, const Viewport& vp) {
    return eval_grid([&](double x1, double x2) { return model.decision({x1, x2}) >= 0.0 ? 0.5 : -0.5; }, width,
                     height, vp);
}

namespace {

double parse_number(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw FormatError("bad number '" + token + "' in SVM model");
    }
    return v;
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) {
        out.push_back(t);
    }
    return out;
}

} // namespace

std::string svm_model_to_text(const SvmModel& model) {
    std::string out = "NUSVC 1\n";
    out += "gamma " + format_double(model.gamma) + " bias " + format_double(model.bias) + " margin " +
           format_double(model.margin);
    if (std::isfinite(model.upper_bound)) {
        out += " bound " + format_double(model.upper_bound) + " size " + std::to_string(model.training_size);
    }
    out += '\n';
    for (std::size_t i = 0; i < model.support_points.size(); ++i) {
        out += format_double(model.support_points[i].x1) + ' ' + format_double(model.support_points[i].x2) + ' ' +
               format_double(model.coefficients[i]) + '\n';
    }
    return out;
}

SvmModel svm_model_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || tokens_of(line) != std::vector<std::string>{"NUSVC", "1"}) {
        throw FormatError("SVM model must start with 'NUSVC 1'");
    }
    if (!std::getline(in, line)) {
        throw FormatError("SVM model lacks the parameter line");
    }
    const auto params = tokens_of(line);
    if (params.size() < 4 || params.size() % 2 != 0 || params[0] != "gamma" || params[2] != "bias") {
        throw FormatError("SVM parameter line must read 'gamma <g> bias <b> ...'");
    }
    SvmModel model;
    model.gamma = parse_number(params[1]);
    model.bias = parse_number(params[3]);
    for (std::size_t k = 4; k < params.size(); k += 2) {
        if (params[k] == "margin") {
            model.margin = parse_number(params[k + 1]);
        } else if (params[k] == "bound") {
            model.upper_bound = parse_number(params[k + 1]);
        } else if (params[k] == "size") {
            model.training_size = static_cast<std::size_t>(parse_number(params[k + 1]));
        } else {
            throw FormatError("unknown SVM parameter '" + params[k] + "'");
        }
    }
    if (!(model.gamma > 0.0)) {
        throw FormatError("SVM gamma must be positive");
    }
    while (std::getline(in, line)) {
        const auto t = tokens_of(line);
        if (t.empty()) {
            continue;
        }
        if (t.size() != 3) {
            throw FormatError("support vector line must hold 'x1 x2 coeff'");
        }
        model.support_points.push_back({parse_number(t[0]), parse_number(t[1])});
        model.coefficients.push_back(parse_number(t[2]));
    }
    return model;
}

void save_svm_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << svm_model_to_text(model);
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

SvmModel load_svm_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return svm_model_from_text(buf.str());
}

} // namespace distgen
