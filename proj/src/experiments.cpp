#include "mvb/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <omp.h>

#include "mvb/errors.hpp"
#include "mvb/learning.hpp"
#include "mvb/rng.hpp"

namespace mvb {

namespace {

// Stream tags keep RNG streams of different roles disjoint.
constexpr std::uint64_t kStreamModel = 1ULL << 48;
constexpr std::uint64_t kStreamPerturbation = 2ULL << 48;
constexpr std::uint64_t kStreamCircuit = 3ULL << 48;

std::vector<CnotGate> even_link_cnots(int n) {
    std::vector<CnotGate> gates;
    for (int q = 0; q + 1 < n; q += 2) {
        gates.push_back({q, q + 1});
    }
    return gates;
}

std::vector<CnotGate> odd_link_cnots(int n) {
    std::vector<CnotGate> gates;
    for (int q = 1; q + 1 < n; q += 2) {
        gates.push_back({q, q + 1});
    }
    return gates;
}

std::vector<SingleQubitGate> haar_layer(int n, std::mt19937_64& rng) {
    std::vector<SingleQubitGate> gates;
    gates.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
        gates.push_back(haar_single_qubit_gate(q, rng));
    }
    return gates;
}

}  // namespace

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) {
        return {};
    }
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

PauliLindbladModel random_pairwise_model(int n, const std::vector<std::pair<int, int>>& pairs,
                                         double rate_min, double rate_max, std::mt19937_64& rng,
                                         const std::string& layer_id) {
    std::uniform_real_distribution<double> dist(rate_min, rate_max);
    PauliLindbladModel model;
    model.n = n;
    model.layer_id = layer_id;
    for (const auto& p : pairwise_local_paulis(n, pairs)) {
        model.terms.push_back({p, rate_min == rate_max ? rate_min : dist(rng)});
    }
    return model;
}

PauliString random_nonidentity_pauli(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> dist(1, pauli_space_size(n) - 1);
    return PauliString::from_index(n, dist(rng));
}

// ---------------------------------------------------------------------------
// Perturbation experiment

void PerturbationConfig::validate() const {
    if (n < 2 || n > kMaxSimQubits) {
        throw ValidationError("perturbation experiment needs 2..10 qubits");
    }
    if (depth < 1 || num_circuits < 1 || num_channel_sets < 1) {
        throw ValidationError("perturbation experiment sizes must be positive");
    }
    if (rate_min < 0 || rate_max < rate_min || eps_min < 0 || eps_max < eps_min) {
        throw ValidationError("perturbation rate ranges must be ordered and nonnegative");
    }
}

PerturbationResult run_perturbation_experiment(const PerturbationConfig& config) {
    config.validate();
    PerturbationResult result;
    result.config = config;

    const auto pairs = line_pairs(config.n);
    {
        auto rng = make_rng(config.seed, kStreamModel);
        result.model_even = random_pairwise_model(config.n, pairs, config.rate_min,
                                                  config.rate_max, rng, "even");
        result.model_odd = random_pairwise_model(config.n, pairs, config.rate_min,
                                                 config.rate_max, rng, "odd");
    }
    const PauliStochastishChannel model_even_ch = channel_from_model(result.model_even);
    const PauliStochastishChannel model_odd_ch = channel_from_model(result.model_odd);

    for (int set = 0; set < config.num_channel_sets; ++set) {
        auto rng = make_rng(config.seed, kStreamPerturbation + static_cast<std::uint64_t>(set));
        std::uniform_real_distribution<double> eps(config.eps_min, config.eps_max);
        PerturbationSetResult set_result;
        set_result.actual_even = result.model_even;
        set_result.actual_odd = result.model_odd;
        for (auto& term : set_result.actual_even.terms) {
            term.rate += config.eps_min == config.eps_max ? config.eps_min : eps(rng);
        }
        for (auto& term : set_result.actual_odd.terms) {
            term.rate += config.eps_min == config.eps_max ? config.eps_min : eps(rng);
        }
        const PauliStochastishChannel actual_even_ch = channel_from_model(set_result.actual_even);
        const PauliStochastishChannel actual_odd_ch = channel_from_model(set_result.actual_odd);

        std::vector<LayerRatioData> layers;
        std::vector<std::pair<PauliLindbladModel, PauliLindbladModel>> comparison;
        for (int rep = 0; rep < config.depth; ++rep) {
            layers.push_back(LayerRatioData::from_channels(actual_even_ch, result.model_even));
            layers.push_back(LayerRatioData::from_channels(actual_odd_ch, result.model_odd));
            comparison.emplace_back(set_result.actual_even, result.model_even);
            comparison.emplace_back(set_result.actual_odd, result.model_odd);
        }
        set_result.report = build_bound_report(layers);
        set_result.delta_c = compare_models(comparison);

        set_result.delta_o.assign(static_cast<std::size_t>(config.num_circuits), 0.0);
        const PauliVector rho0 = zero_state_coeffs(config.n);
        const auto even_gates = even_link_cnots(config.n);
        const auto odd_gates = odd_link_cnots(config.n);

#pragma omp parallel for schedule(dynamic)
        for (int circuit = 0; circuit < config.num_circuits; ++circuit) {
            auto crng = make_rng(config.seed,
                                 kStreamCircuit +
                                     static_cast<std::uint64_t>(set) * 1000003ULL +
                                     static_cast<std::uint64_t>(circuit));
            LayeredCircuit c;
            c.n = config.n;
            std::vector<std::optional<PauliStochastishChannel>> models;
            for (int rep = 0; rep < config.depth; ++rep) {
                c.layers.push_back({haar_layer(config.n, crng), actual_even_ch, even_gates});
                models.emplace_back(model_even_ch);
                c.layers.push_back({haar_layer(config.n, crng), actual_odd_ch, odd_gates});
                models.emplace_back(model_odd_ch);
            }
            const PauliString obs = random_nonidentity_pauli(config.n, crng);
            set_result.delta_o[static_cast<std::size_t>(circuit)] =
                mitigated_delta(c, models, rho0, obs);
        }
        result.sets.push_back(std::move(set_result));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Cross-talk experiment

void CrosstalkConfig::validate() const {
    if (n < 2 || n > kMaxSimQubits) {
        throw ValidationError("crosstalk experiment needs 2..10 qubits");
    }
    if (depth < 1 || num_circuits < 0 || lambda_crosstalk.empty()) {
        throw ValidationError("crosstalk experiment needs a depth and a cross-talk grid");
    }
    if (rate_min < 0 || rate_max < rate_min) {
        throw ValidationError("crosstalk rate range must be ordered and nonnegative");
    }
    for (double v : lambda_crosstalk) {
        if (v < 0) {
            throw ValidationError("cross-talk rates must be nonnegative");
        }
    }
}

CrosstalkResult run_crosstalk_experiment(const CrosstalkConfig& config) {
    config.validate();
    CrosstalkResult result;
    result.config = config;

    const auto pairs = line_pairs(config.n);
    {
        auto rng = make_rng(config.seed, kStreamModel);
        result.in_model_actual = random_pairwise_model(config.n, pairs, config.rate_min,
                                                       config.rate_max, rng, "xtalk");
    }

    // Long-range generator Z...Z between the ends of the line.
    PauliString crosstalk = PauliString::from_bits(
        config.n, 0, 1ULL | (1ULL << (config.n - 1)));

    const std::vector<PauliString> measured = pairwise_local_paulis(config.n, pairs);
    const PauliVector rho0 = zero_state_coeffs(config.n);
    const auto even_gates = even_link_cnots(config.n);
    const auto odd_gates = odd_link_cnots(config.n);

    for (double lambda : config.lambda_crosstalk) {
        CrosstalkPointResult point;
        point.lambda_crosstalk = lambda;

        PauliLindbladModel actual = result.in_model_actual;
        if (lambda > 0.0) {
            actual.terms.push_back({crosstalk, lambda});
        }
        const PauliStochastishChannel actual_ch = channel_from_model(actual);

        // Infinite-shot Pauli learning of the pairwise-local model.
        LearningRecord record;
        record.n = config.n;
        record.layer_id = "xtalk";
        for (const auto& p : measured) {
            record.fidelities[p.index()] = FidelityEstimate{actual_ch.fidelities.at(p), 0.0};
        }
        record.generator_support = measured;
        point.fitted = fit_model_nnls(record).model;

        std::vector<LayerRatioData> layers(
            static_cast<std::size_t>(config.depth),
            LayerRatioData::from_channels(actual_ch, point.fitted));
        point.report = build_bound_report(layers);
        point.delta_c = compare_models(actual, point.fitted, config.depth);

        const PauliStochastishChannel fitted_ch = channel_from_model(point.fitted);
        point.delta_o.assign(static_cast<std::size_t>(config.num_circuits), 0.0);

#pragma omp parallel for schedule(dynamic)
        for (int circuit = 0; circuit < config.num_circuits; ++circuit) {
            auto crng = make_rng(config.seed,
                                 kStreamCircuit + static_cast<std::uint64_t>(circuit));
            LayeredCircuit c;
            c.n = config.n;
            std::vector<std::optional<PauliStochastishChannel>> models;
            for (int rep = 0; rep < config.depth; ++rep) {
                c.layers.push_back({haar_layer(config.n, crng), actual_ch, even_gates});
                models.emplace_back(fitted_ch);
                c.layers.push_back({haar_layer(config.n, crng), std::nullopt, odd_gates});
                models.emplace_back(std::nullopt);
            }
            const PauliString obs = random_nonidentity_pauli(config.n, crng);
            point.delta_o[static_cast<std::size_t>(circuit)] =
                mitigated_delta(c, models, rho0, obs);
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

// ---------------------------------------------------------------------------
// T1 drift experiment

void T1DriftConfig::validate() const {
    const int n = static_cast<int>(t1.size());
    if (n < 1 || n > kMaxSimQubits) {
        throw ValidationError("t1 drift experiment needs 1..10 qubits");
    }
    for (double v : t1) {
        if (!(v > 0)) {
            throw ValidationError("T1 values must be positive");
        }
    }
    if (!(gate_time > 0) || depth < 1 || num_circuits < 0 || drift.empty()) {
        throw ValidationError("t1 drift experiment needs a gate time, depth and drift grid");
    }
    for (double d : drift) {
        if (d <= -1.0) {
            throw ValidationError("relaxation-rate change must stay above -100%");
        }
    }
}

T1DriftResult run_t1_drift_experiment(const T1DriftConfig& config) {
    config.validate();
    const int n = static_cast<int>(config.t1.size());
    T1DriftResult result;
    result.config = config;
    for (std::uint64_t idx = 1; idx < pauli_space_size(n); ++idx) {
        result.observables.push_back(PauliString::from_index(n, idx));
    }

    const PauliLindbladModel model = twirled_amplitude_damping(config.t1, config.gate_time, "t1");
    const PauliStochastishChannel model_ch = channel_from_model(model);
    const PauliVector rho0 = zero_state_coeffs(n);

    for (double drift : config.drift) {
        T1DriftPointResult point;
        point.drift = drift;

        std::vector<double> actual_t1(config.t1.size());
        for (std::size_t q = 0; q < config.t1.size(); ++q) {
            actual_t1[q] = config.t1[q] / (1.0 + drift);  // 1/T1 scaled by (1 + drift)
        }
        const PauliLindbladModel actual = twirled_amplitude_damping(actual_t1, config.gate_time, "t1");
        const PauliStochastishChannel actual_ch = channel_from_model(actual);

        point.delta_c = compare_models(actual, model, config.depth);
        std::vector<LayerRatioData> layers(static_cast<std::size_t>(config.depth),
                                           LayerRatioData::from_channels(actual_ch, model));
        point.report = build_bound_report(layers);

        const PauliStochastishChannel mitigated = compose(actual_ch, invert(model_ch));
        point.delta_o.assign(static_cast<std::size_t>(config.num_circuits),
                             std::vector<double>(result.observables.size(), 0.0));

#pragma omp parallel for schedule(dynamic)
        for (int circuit = 0; circuit < config.num_circuits; ++circuit) {
            auto crng = make_rng(config.seed,
                                 kStreamCircuit + static_cast<std::uint64_t>(circuit));
            LayeredCircuit ideal;
            ideal.n = n;
            for (int rep = 0; rep < config.depth; ++rep) {
                ideal.layers.push_back({haar_layer(n, crng), std::nullopt, {{0, 1}}});
            }
            LayeredCircuit noisy = ideal;
            for (auto& layer : noisy.layers) {
                layer.channel = mitigated;
            }
            const PauliVector ideal_state = evolve(ideal, rho0);
            const PauliVector noisy_state = evolve(noisy, rho0);
            auto& row = point.delta_o[static_cast<std::size_t>(circuit)];
            for (std::size_t o = 0; o < result.observables.size(); ++o) {
                const std::uint64_t idx = o + 1;
                row[o] = std::abs(ideal_state[idx] - noisy_state[idx]);
            }
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Clifford-perturbation counterexample

void CounterexampleConfig::validate() const {
    if (depth < 1 || depth > 40) {
        throw ValidationError("counterexample depth must be in [1, 40]");
    }
    if (!(r_o > 0) || !(r_po > 0)) {
        throw ValidationError("fidelity ratios must be positive");
    }
    if (dtheta_points < 1 || !(dtheta_max >= dtheta_min)) {
        throw ValidationError("invalid dtheta grid");
    }
}

Eigen::MatrixXd cpt_hessian(int depth, double r_o, double r_po) {
    if (depth < 1 || !(r_o > 0) || !(r_po > 0)) {
        throw ValidationError("Hessian needs depth >= 1 and positive ratios");
    }
    Eigen::MatrixXd h(depth, depth);
    for (int m = 0; m < depth; ++m) {
        for (int a = 0; a < depth; ++a) {
            const int d = std::abs(m - a);
            h(m, a) = -(1.0 - std::pow(r_po, d) * std::pow(r_o, depth - d));
        }
    }
    return h;
}

namespace {

LayeredCircuit cpt_circuit(int depth, double r_o, double r_po, const std::vector<double>& thetas,
                           bool with_channel) {
    PauliVector f(1);
    f.values = {1.0, r_po, r_o, r_po};  // (I, X, Z, Y): O = Z, PO ~ Y
    const PauliStochastishChannel v = PauliStochastishChannel::from_fidelities(f);
    LayeredCircuit c;
    c.n = 1;
    for (int k = 0; k < depth; ++k) {
        CircuitLayer noise;
        if (with_channel) {
            noise.channel = v;
        }
        c.layers.push_back(std::move(noise));
        CircuitLayer rotation;
        rotation.easy.push_back(pauli_rotation_gate(0, 'X', thetas[static_cast<std::size_t>(k)]));
        c.layers.push_back(std::move(rotation));
    }
    return c;
}

}  // namespace

double cpt_signed_delta(int depth, double r_o, double r_po, const std::vector<double>& thetas) {
    if (static_cast<int>(thetas.size()) != depth) {
        throw ValidationError("one rotation angle per layer is required");
    }
    const PauliVector rho0 = zero_state_coeffs(1);
    const PauliString obs = PauliString::parse("Z");
    const double ideal =
        exact_expectation(cpt_circuit(depth, r_o, r_po, thetas, false), rho0, obs);
    const double mitigated =
        exact_expectation(cpt_circuit(depth, r_o, r_po, thetas, true), rho0, obs);
    return ideal - mitigated;
}

double cpt_signed_delta_subset_sum(int depth, double r_o, double r_po,
                                   const std::vector<double>& thetas) {
    if (depth < 1 || depth > 24) {
        throw ValidationError("subset enumeration is limited to depth 24");
    }
    if (static_cast<int>(thetas.size()) != depth) {
        throw ValidationError("one rotation angle per layer is required");
    }
    std::vector<double> sines(thetas.size());
    std::vector<double> cosines(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        sines[i] = std::sin(thetas[i]);
        cosines[i] = std::cos(thetas[i]);
    }
    // rho is the +1 eigenstate of O and P anticommutes with O, so only even
    // subset sizes contribute, with sign i^k = (-1)^(k/2).
    double total = 0.0;
    const std::uint64_t masks = 1ULL << depth;
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
        const int k = std::popcount(mask);
        if (k & 1) {
            continue;
        }
        // Count layers whose channel sees PO: those preceded by an odd number
        // of sine-branch rotations.
        int n_po = 0;
        int parity = 0;
        double product = 1.0;
        for (int m = 0; m < depth; ++m) {
            n_po += parity;
            if ((mask >> m) & 1) {
                parity ^= 1;
                product *= sines[static_cast<std::size_t>(m)];
            } else {
                product *= cosines[static_cast<std::size_t>(m)];
            }
        }
        const double weight = 1.0 - std::pow(r_po, n_po) * std::pow(r_o, depth - n_po);
        const double sign = (k % 4 == 0) ? 1.0 : -1.0;
        total += sign * weight * product;
    }
    return total;
}

HessianScanResult cpt_counterexample_scan(const CounterexampleConfig& config) {
    config.validate();
    const int l = config.depth;
    const Eigen::MatrixXd h = cpt_hessian(l, config.r_o, config.r_po);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);

    HessianScanResult result;
    result.worst_case_clifford = 1.0 - std::pow(config.r_o, l);
    for (int i = 0; i < l; ++i) {
        result.eigenvalues.push_back(es.eigenvalues()[i]);
        if (es.eigenvalues()[i] > 1e-12) {
            ++result.positive_eigenvalues;
        }
    }
    for (int i = 0; i < config.dtheta_points; ++i) {
        const double t = config.dtheta_points == 1
                             ? config.dtheta_min
                             : config.dtheta_min + (config.dtheta_max - config.dtheta_min) * i /
                                                       (config.dtheta_points - 1);
        result.dtheta.push_back(t);
    }

    result.traces.assign(static_cast<std::size_t>(l),
                         std::vector<double>(result.dtheta.size(), 0.0));
    bool oracle_mismatch = false;
#pragma omp parallel for collapse(2) schedule(dynamic)
    for (int vec = 0; vec < l; ++vec) {
        for (int ti = 0; ti < config.dtheta_points; ++ti) {
            std::vector<double> thetas(static_cast<std::size_t>(l));
            for (int m = 0; m < l; ++m) {
                thetas[static_cast<std::size_t>(m)] =
                    result.dtheta[static_cast<std::size_t>(ti)] * es.eigenvectors()(m, vec);
            }
            const double signed_delta = cpt_signed_delta(l, config.r_o, config.r_po, thetas);
            if (l <= 12) {
                const double oracle =
                    cpt_signed_delta_subset_sum(l, config.r_o, config.r_po, thetas);
                if (std::abs(oracle - signed_delta) > 1e-9) {
#pragma omp atomic write
                    oracle_mismatch = true;
                }
            }
            result.traces[static_cast<std::size_t>(vec)][static_cast<std::size_t>(ti)] =
                std::abs(signed_delta);
        }
    }
    if (oracle_mismatch) {
        throw NumericalError("subset enumeration disagrees with exact simulation");
    }
    return result;
}

}  // namespace mvb
