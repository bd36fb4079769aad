#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvb/channel.hpp"
#include "mvb/pauli.hpp"

namespace mvb {

// The per-layer inputs of the bound estimators: whichever Pauli fidelity
// ratios r_P = f_meas / f_mod were measured, plus the mitigating model's
// gamma. Ratios never measured are treated as 1 where an estimator needs the
// full set; the coverage fraction reports how much was actually measured.
struct LayerRatioData {
    int n = 0;
    std::string layer_id;
    double gamma = 1.0;
    std::map<std::uint64_t, double> ratios;  // keyed by Pauli dense index

    static LayerRatioData from_channels(const PauliStochastishChannel& actual,
                                        const PauliLindbladModel& model);

    void validate() const;
    double coverage() const;  // known ratios (identity included) / 4^n
};

// (sum_k r_k) / 4^n with unmeasured ratios imputed as 1: the generalized
// process fidelity of the mitigated layer.
double nu0_estimate(const LayerRatioData& layer);

// The two-norm deviation measure of the ratio set,
// (4^n-1)/4^n * sqrt(sum_k r_k (r_k - mean of the others)), radicand clamped
// at zero against floating-point dips from imputed entries.
double t_term(const LayerRatioData& layer);

// Per-layer diamond-distance estimates: |1-nu0| + gamma - nu0 and
// |1-nu0| + T respectively.
double layer_distance_gamma(const LayerRatioData& layer);
double layer_distance_two(const LayerRatioData& layer);

// Multi-layer bounds: sum_j distance_j * prod_{k<j} gamma_k. delta_gamma stays
// positive even for perfect mitigation whenever gamma > 1; delta_two vanishes
// when every ratio is 1.
double delta_gamma(const std::vector<LayerRatioData>& layers);
double delta_two(const std::vector<LayerRatioData>& layers);

// 2 sum_j (1 - nu0_j): the special case when every mitigated layer is CPTP.
double delta_cptp(const std::vector<double>& nu0_per_layer);

// max(|1 - prod_k max_j r_j|, |1 - prod_k min_j r_j|) over measured
// non-identity ratios only; a heuristic realized by an actual Clifford
// circuit, not a guaranteed bound.
double worst_case_clifford(const std::vector<LayerRatioData>& layers);

// Exact model-vs-model bound: each layer's mitigated map factors into
// commuting single-Pauli maps W_m whose diamond norms have closed forms in
// the two rate sets. Terms are ordered by merged Pauli index so reruns are
// bit-identical. `layers` repeats the same pair of models.
double compare_models(const PauliLindbladModel& actual, const PauliLindbladModel& mitigator,
                      int layers);
double compare_models(
    const std::vector<std::pair<PauliLindbladModel, PauliLindbladModel>>& layer_models);

struct PeaBound {
    std::vector<double> eta;  // one per amplification factor
    Eigen::MatrixXd sigma;    // rank-one covariance eta_j * eta_k
};

// Amplification-error bound per stretch factor mu: all channels stay CPTP so
// the layer count enters linearly, and the per-layer term is the two-norm
// expression over fidelity differences f^mu - fhat^mu.
PeaBound pea_bound(const PauliVector& f_meas, const PauliVector& f_mod,
                   const std::vector<double>& mus, int layers);

// Tensor-network mitigation bound: same per-layer distance estimates as
// delta_two but weighted by the inverse-model norm gamma-hat per layer, the
// last layer picking up weights only through layer l-1.
double tem_bound(const std::vector<LayerRatioData>& layers);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

// Generalized least-squares line fit with a (possibly singular) covariance;
// used to push the PEA bound through the zero-noise extrapolation.
LineFit gls_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const Eigen::MatrixXd& sigma);

struct LayerBreakdown {
    std::string layer_id;
    double gamma = 1.0;
    double nu0 = 1.0;
    double t_term = 0.0;
    double dd_gamma = 0.0;
    double dd_2norm = 0.0;
    double coverage = 0.0;
};

struct BoundReport {
    int n = 0;
    std::vector<LayerBreakdown> layers;
    double delta_gamma = 0.0;
    double delta_two = 0.0;
    double delta_min = 0.0;
    double worst_case_clifford = 0.0;
    double coverage_fraction = 0.0;
};

BoundReport build_bound_report(const std::vector<LayerRatioData>& layers);

}  // namespace mvb
