#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvb/channel.hpp"
#include "mvb/pauli.hpp"

namespace mvb {

// Depth-resolved twirled expectation values for one measured Pauli.
struct DecayCurve {
    PauliString pauli;
    std::vector<int> depths;             // strictly increasing
    std::vector<double> expectations;    // per-depth means, in [-1, 1]
    std::vector<long> shots;             // per-depth total shots (0 = exact)
    std::vector<int> randomizations;     // per-depth twirl count

    void validate() const;
};

struct FidelityEstimate {
    double f_meas = 1.0;
    double stderr_f = 0.0;
};

// Per-layer learning output: measured Pauli fidelities with uncertainties,
// the degenerate pairs that were split by geometric mean, the raw decay
// curves when available, and the generator support the model may use.
struct LearningRecord {
    int n = 0;
    std::string layer_id;
    std::map<std::uint64_t, FidelityEstimate> fidelities;  // keyed by Pauli dense index
    std::vector<std::pair<PauliString, PauliString>> degenerate_pairs;
    std::vector<PauliString> generator_support;
    std::vector<DecayCurve> curves;

    void validate() const;
};

struct ModelFitResult {
    PauliLindbladModel model;
    Eigen::MatrixXd rate_covariance;              // over model terms; zero when not bootstrapped
    std::map<std::uint64_t, double> residuals;    // f_meas - f_mod per fitted Pauli
    int bootstrap_reps = 0;
};

// Per-randomization one-bit outcome counts for every measured Pauli and
// depth; the input that bootstrap resampling needs.
struct RawLearningData {
    int n = 0;
    std::string layer_id;
    int shots_per_randomization = 0;
    std::vector<int> depths;
    // counts[pauli][depth][randomization] = number of +1 outcomes
    std::vector<std::pair<PauliString, std::vector<std::vector<int>>>> counts;

    void validate() const;
};

struct SynthesisParams {
    std::vector<int> depths;
    int randomizations = 100;
    int shots = 200;
    bool infinite_shots = false;
    std::uint64_t seed = 0;
};

struct SyntheticLearningData {
    std::vector<DecayCurve> curves;
    std::optional<RawLearningData> raw;  // absent in the infinite-shot limit
};

// Simulates the Pauli-learning experiment on a known CPTP channel: for each
// measured Pauli the depth-d twirled signal decays as spam_P * f_P^d, sampled
// per randomization from the matching binomial distribution. Infinite-shot
// mode records the exact expectations instead.
SyntheticLearningData synthesize_learning_data(const PauliStochastishChannel& truth,
                                               const std::vector<PauliString>& measured,
                                               const std::map<std::uint64_t, double>& spam,
                                               const SynthesisParams& params);

std::vector<DecayCurve> curves_from_raw(const RawLearningData& raw);

struct DecayFit {
    bool ok = false;
    double amplitude = 0.0;
    double fidelity = 0.0;
    double stderr_f = 0.0;
};

// Weighted least-squares fit of A * f^d; A absorbs SPAM, f is clipped to
// (0, 1], and the standard error comes from the fit's local curvature.
DecayFit fit_decay(const DecayCurve& curve);

std::map<std::uint64_t, FidelityEstimate> fidelities_from_curves(const std::vector<DecayCurve>& curves);

// Replaces each pair's fidelities by their geometric mean; the product of the
// pair is preserved exactly, everything else is untouched.
void resolve_degeneracy(std::map<std::uint64_t, FidelityEstimate>& fidelities,
                        const std::vector<std::pair<PauliString, PauliString>>& pairs);

enum class FitWeighting { uniform, variance };

// Nonnegative least squares in log-fidelity space, where -ln(f)/2 = M lambda
// is linear in the rates; residuals are reported back in fidelity space.
ModelFitResult fit_model_nnls(const LearningRecord& record,
                              FitWeighting weighting = FitWeighting::uniform);

struct BootstrapResult {
    ModelFitResult fit;                          // mean rates and their covariance
    std::map<std::uint64_t, double> sigma_f_meas;  // empirical sigma of each measured fidelity
};

// Two-fold bootstrap: resample the randomization ensemble, then per-circuit
// binomial counts, and push each replica through curve fitting, degeneracy
// resolution, and the NNLS model fit. Deterministic given the seed and
// independent of scheduling.
BootstrapResult bootstrap(const RawLearningData& raw,
                          const std::vector<std::pair<PauliString, PauliString>>& degenerate_pairs,
                          const std::vector<PauliString>& generator_support, int n_reps,
                          std::uint64_t seed, FitWeighting weighting = FitWeighting::uniform);

struct LayerOccurrence {
    std::string layer_id;
    PauliString pauli;  // observable back-propagated to this layer
};

struct ModelPrediction {
    double f_mod = 1.0;
    double sigma = 0.0;
};

// sigma[f_mod] ~= 2 f_mod sqrt(sum_{m,n} C_{m,n}) over the anticommuting
// rates along the path; occurrences of the same layer share rate draws and
// are fully correlated, distinct layers are independent.
ModelPrediction model_prediction_sigma(const std::map<std::string, ModelFitResult>& fits,
                                       const std::vector<LayerOccurrence>& path);

// Propagated uncertainty of f_meas/f_mod assuming the two are uncorrelated.
double ratio_sigma(double f_meas, double sigma_meas, double f_mod, double sigma_mod);

}  // namespace mvb
