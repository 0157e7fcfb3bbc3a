#pragma once

// Reference computations used only by the tests. Deliberately naive.

#include "distgen/mlp.hpp"
#include "distgen/svm.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline long double forward_ld(const distgen::NetworkParams& net, long double x1, long double x2) {
    std::vector<long double> a{x1, x2};
    for (const auto& layer : net.layers) {
        std::vector<long double> next(layer.outputs);
        for (std::size_t j = 0; j < layer.outputs; ++j) {
            long double s = layer.biases[j];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                s += static_cast<long double>(layer.weight(j, i)) * a[i];
            }
            next[j] = std::tanh(s);
        }
        a = std::move(next);
    }
    return a[0];
}

inline long double loss_ld(const distgen::NetworkParams& net, const distgen::Sample& s) {
    const long double d = forward_ld(net, s.x1, s.x2) - s.y;
    return 0.5L * d * d;
}

inline Eigen::MatrixXd q_matrix(const distgen::LabeledSet& data, double gamma) {
    const auto l = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd q(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
        for (Eigen::Index j = 0; j < l; ++j) {
            q(i, j) = data.labels[i] * data.labels[j] * distgen::rbf_kernel(data.points[i], data.points[j], gamma);
        }
    }
    return q;
}

struct QpOptimum {
    double objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd alpha;
};

/// Global minimum of 1/2 a'Qa over 0 <= a <= cost/l, y'a = 0, e'a = nu by
/// enumerating every lower/upper/free status assignment and solving the
/// equality-constrained subproblem on the free set. Exponential; l <= 9.
inline QpOptimum nu_qp_by_enumeration(const distgen::LabeledSet& data, double nu, double gamma, double cost) {
    const int l = static_cast<int>(data.size());
    const Eigen::MatrixXd q = q_matrix(data, gamma);
    const double ub = cost / l;
    Eigen::VectorXd y(l);
    for (int i = 0; i < l; ++i) {
        y(i) = data.labels[i];
    }
    int combos = 1;
    for (int i = 0; i < l; ++i) {
        combos *= 3;
    }
    QpOptimum best;
    std::vector<int> status(l);
    for (int code = 0; code < combos; ++code) {
        int c = code;
        std::vector<int> free;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(l);
        for (int i = 0; i < l; ++i) {
            status[i] = c % 3;
            c /= 3;
            if (status[i] == 1) {
                a(i) = ub;
            } else if (status[i] == 2) {
                free.push_back(i);
            }
        }
        const int f = static_cast<int>(free.size());
        if (f > 0) {
            Eigen::MatrixXd k = Eigen::MatrixXd::Zero(f + 2, f + 2);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 2);
            const Eigen::VectorXd qa = q * a;
            for (int r = 0; r < f; ++r) {
                for (int s = 0; s < f; ++s) {
                    k(r, s) = q(free[r], free[s]);
                }
                k(r, f) = k(f, r) = y(free[r]);
                k(r, f + 1) = k(f + 1, r) = 1.0;
                rhs(r) = -qa(free[r]);
            }
            rhs(f) = -y.dot(a);
            rhs(f + 1) = nu - a.sum();
            const Eigen::VectorXd sol = k.completeOrthogonalDecomposition().solve(rhs);
            if ((k * sol - rhs).norm() > 1e-9) {
                continue;
            }
            for (int r = 0; r < f; ++r) {
                a(free[r]) = sol(r);
            }
        }
        const double tol = 1e-12;
        if ((a.array() < -tol).any() || (a.array() > ub + tol).any() || std::abs(y.dot(a)) > 1e-10 ||
            std::abs(a.sum() - nu) > 1e-10) {
            continue;
        }
        const double obj = 0.5 * a.dot(q * a);
        if (obj < best.objective) {
            best.objective = obj;
            best.alpha = a;
        }
    }
    return best;
}

} // namespace oracle
