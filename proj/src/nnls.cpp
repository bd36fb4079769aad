#include "mvb/nnls.hpp"

#include <limits>
#include <vector>

#include "mvb/errors.hpp"

namespace mvb {

namespace {

// Least squares on the passive columns only; entries outside `passive` are 0.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t j = 0; j < passive.size(); ++j) {
        sub.col(static_cast<Eigen::Index>(j)) = a.col(passive[j]);
    }
    Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(a.cols());
    for (std::size_t j = 0; j < passive.size(); ++j) {
        full[passive[j]] = sol[static_cast<Eigen::Index>(j)];
    }
    return full;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
    const Eigen::Index m = a.rows();
    const Eigen::Index p = a.cols();
    if (m == 0 || p == 0) {
        throw NumericalError("empty design matrix in NNLS");
    }
    if (b.size() != m) {
        throw NumericalError("NNLS dimension mismatch");
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    std::vector<bool> in_passive(static_cast<std::size_t>(p), false);
    std::vector<int> passive;

    const double grad_scale = std::max((a.transpose() * b).cwiseAbs().maxCoeff(), 1.0);
    const double grad_tol = tol * grad_scale;

    NnlsResult result;
    result.residual_trace.push_back(b.norm());
    const int max_iterations = 3 * static_cast<int>(p) + 30;
    int iterations = 0;

    while (iterations < max_iterations) {
        // Most-violating active coordinate of the gradient w = A^T (b - Ax).
        Eigen::VectorXd w = a.transpose() * (b - a * x);
        int best = -1;
        double best_w = grad_tol;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!in_passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
                best_w = w[j];
                best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            break;  // KKT satisfied
        }
        in_passive[static_cast<std::size_t>(best)] = true;
        passive.push_back(best);

        // Inner loop: retreat until the passive solution is feasible.
        while (true) {
            ++iterations;
            Eigen::VectorXd z = solve_passive(a, b, passive);
            bool feasible = true;
            for (int j : passive) {
                if (z[j] <= 0.0) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                x = z;
                result.residual_trace.push_back((a * x - b).norm());
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (int j : passive) {
                if (z[j] <= 0.0 && x[j] != z[j]) {
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
                }
            }
            if (!std::isfinite(alpha)) {
                alpha = 0.0;
            }
            x += alpha * (z - x);
            // Drop coordinates that hit the bound.
            std::vector<int> kept;
            for (int j : passive) {
                if (x[j] > 0.0 && std::abs(x[j]) > 1e-15) {
                    kept.push_back(j);
                } else {
                    x[j] = 0.0;
                    in_passive[static_cast<std::size_t>(j)] = false;
                }
            }
            result.residual_trace.push_back((a * x - b).norm());
            passive = std::move(kept);
            if (passive.empty()) {
                break;
            }
            if (iterations >= max_iterations) {
                break;
            }
        }
    }

    result.x = x;
    result.residual_norm = (a * x - b).norm();
    result.iterations = iterations;
    return result;
}

}  // namespace mvb
