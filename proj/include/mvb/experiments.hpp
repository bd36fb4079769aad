#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvb/bounds.hpp"
#include "mvb/channel.hpp"
#include "mvb/simulation.hpp"

namespace mvb {

struct Quartiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

Quartiles quartiles(std::vector<double> values);

// ---------------------------------------------------------------------------
// Model-parameter uncertainty: a fixed pairwise-local model mitigates
// channels whose rates are perturbed copies of its own, over random brickwork
// circuits with Haar easy layers on a line of qubits.

struct PerturbationConfig {
    int n = 4;
    int depth = 20;  // repetitions of the [easy, V0, even CNOTs, easy, V1, odd CNOTs] block
    int num_circuits = 100;
    int num_channel_sets = 10;
    double rate_min = 1e-5;
    double rate_max = 1e-4;
    double eps_min = 1e-6;
    double eps_max = 1e-5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PerturbationSetResult {
    PauliLindbladModel actual_even;
    PauliLindbladModel actual_odd;
    BoundReport report;
    double delta_c = 0.0;
    std::vector<double> delta_o;  // one per sampled circuit
};

struct PerturbationResult {
    PerturbationConfig config;
    PauliLindbladModel model_even;
    PauliLindbladModel model_odd;
    std::vector<PerturbationSetResult> sets;
};

PerturbationResult run_perturbation_experiment(const PerturbationConfig& config);

// ---------------------------------------------------------------------------
// Out-of-model error: a long-range ZIIZ generator is added to a pairwise
// actual channel on a 4-qubit line, the pairwise model is learnt from
// infinite-shot Pauli learning, and the mitigated circuits are scanned over
// the cross-talk strength.

struct CrosstalkConfig {
    int n = 4;
    int depth = 4;
    int num_circuits = 1000;
    double rate_min = 1e-5;  // set rate_min = rate_max = 0 for the pure cross-talk case
    double rate_max = 1e-4;
    std::vector<double> lambda_crosstalk{1e-4, 1e-3, 1e-2};
    std::uint64_t seed = 0;

    void validate() const;
};

struct CrosstalkPointResult {
    double lambda_crosstalk = 0.0;
    PauliLindbladModel fitted;
    BoundReport report;
    double delta_c = 0.0;
    std::vector<double> delta_o;
};

struct CrosstalkResult {
    CrosstalkConfig config;
    PauliLindbladModel in_model_actual;  // the pairwise part shared by all grid points
    std::vector<CrosstalkPointResult> points;
};

CrosstalkResult run_crosstalk_experiment(const CrosstalkConfig& config);

// ---------------------------------------------------------------------------
// Coherence drift: twirled amplitude damping learnt at nominal T1 mitigates
// the channel at drifted T1, over deep random single-CNOT-layer circuits.

struct T1DriftConfig {
    std::vector<double> t1{200e-6, 150e-6};  // seconds, one per qubit
    double gate_time = 100e-9;
    int depth = 100;
    int num_circuits = 1000;
    std::vector<double> drift{-0.10, -0.05, -0.02, 0.02, 0.05, 0.10};  // fractional change in 1/T1
    std::uint64_t seed = 0;

    void validate() const;
};

struct T1DriftPointResult {
    double drift = 0.0;
    double delta_c = 0.0;
    BoundReport report;
    std::vector<std::vector<double>> delta_o;  // [circuit][observable]
};

struct T1DriftResult {
    T1DriftConfig config;
    std::vector<PauliString> observables;  // all non-identity Paulis
    std::vector<T1DriftPointResult> points;
};

T1DriftResult run_t1_drift_experiment(const T1DriftConfig& config);

// ---------------------------------------------------------------------------
// Near-Clifford landscape: depth-l single-qubit circuits of X rotations
// around the worst-case Clifford point, with the mitigated map fixed by the
// fidelity ratios r_O and r_PO of the observable and its image under P.

struct CounterexampleConfig {
    int depth = 25;
    double r_o = 0.9;
    double r_po = 1.0;
    double dtheta_min = -0.5;
    double dtheta_max = 0.5;
    int dtheta_points = 101;
    std::uint64_t seed = 0;  // unused; kept so every experiment shares the manifest shape

    void validate() const;
};

// Closed-form Hessian of the signed error at the Clifford point.
Eigen::MatrixXd cpt_hessian(int depth, double r_o, double r_po);

// Signed error ideal - mitigated from exact simulation of the rotation
// circuit with the ratio channel inserted before every rotation.
double cpt_signed_delta(int depth, double r_o, double r_po, const std::vector<double>& thetas);

// The same quantity from the Clifford-perturbation subset enumeration;
// exponential in depth, usable as an independent check for small circuits.
double cpt_signed_delta_subset_sum(int depth, double r_o, double r_po,
                                   const std::vector<double>& thetas);

struct HessianScanResult {
    std::vector<double> eigenvalues;  // ascending
    int positive_eigenvalues = 0;
    double worst_case_clifford = 0.0;  // 1 - r_o^depth
    std::vector<double> dtheta;
    std::vector<std::vector<double>> traces;  // [eigenvector][dtheta] -> |signed error|
};

// Scans |signed error| along every Hessian eigenvector. For depth <= 12 each
// scanned point is cross-checked against the subset enumeration to 1e-9.
HessianScanResult cpt_counterexample_scan(const CounterexampleConfig& config);

// ---------------------------------------------------------------------------
// Shared helpers.

PauliLindbladModel random_pairwise_model(int n, const std::vector<std::pair<int, int>>& pairs,
                                         double rate_min, double rate_max, std::mt19937_64& rng,
                                         const std::string& layer_id);

PauliString random_nonidentity_pauli(int n, std::mt19937_64& rng);

}  // namespace mvb
