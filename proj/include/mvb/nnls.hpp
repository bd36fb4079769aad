#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mvb {

struct NnlsResult {
    Eigen::VectorXd x;         // the nonnegative minimizer
    double residual_norm = 0;  // ||A x - b||
    int iterations = 0;
    std::vector<double> residual_trace;  // ||A x - b|| after every x update
};

// Lawson-Hanson active-set solve of min ||A x - b|| subject to x >= 0.
// On exit the KKT conditions hold to `tol` relative to the gradient scale:
// gradient components are ~0 on the passive set and nonnegative (for the
// residual form A^T(b - Ax)) nowhere exceeding tol on the active set. The
// residual trace is nonincreasing across iterations.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = 1e-12);

}  // namespace mvb
