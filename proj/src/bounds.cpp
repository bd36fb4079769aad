#include "mvb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mvb/errors.hpp"

namespace mvb {

LayerRatioData LayerRatioData::from_channels(const PauliStochastishChannel& actual,
                                             const PauliLindbladModel& model) {
    if (actual.n != model.n) {
        throw ValidationError("actual channel and model qubit counts differ");
    }
    LayerRatioData layer;
    layer.n = actual.n;
    layer.layer_id = model.layer_id;
    layer.gamma = mvb::gamma(model);
    const PauliStochastishChannel model_channel = channel_from_model(model);
    const PauliStochastishChannel v = ratio(actual.fidelities, model_channel.fidelities);
    for (std::size_t i = 0; i < v.fidelities.size(); ++i) {
        layer.ratios[i] = v.fidelities[i];
    }
    return layer;
}

void LayerRatioData::validate() const {
    if (n <= 0 || n > kMaxDenseQubits) {
        throw ValidationError("layer ratio data qubit count out of range");
    }
    if (!(gamma >= 1.0)) {
        throw ValidationError("layer gamma must be >= 1");
    }
    const std::size_t size = pauli_space_size(n);
    for (const auto& [idx, r] : ratios) {
        if (idx >= size) {
            throw ValidationError("ratio Pauli index out of range");
        }
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ValidationError("fidelity ratios must be positive and finite");
        }
        if (idx == 0 && r != 1.0) {
            throw ValidationError("identity fidelity ratio must equal 1");
        }
    }
}

double LayerRatioData::coverage() const {
    const double size = static_cast<double>(pauli_space_size(n));
    double known = static_cast<double>(ratios.size());
    if (!ratios.count(0)) {
        known += 1.0;  // the identity ratio is 1 by trace preservation
    }
    return known / size;
}

namespace {

struct RatioMoments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// Sum and sum of squares over all 4^n ratios with unmeasured entries
// imputed as 1 (the identity contributes its exact 1).
RatioMoments moments_with_imputation(const LayerRatioData& layer) {
    const double size = static_cast<double>(pauli_space_size(layer.n));
    double measured = static_cast<double>(layer.ratios.size());
    if (!layer.ratios.count(0)) {
        measured += 1.0;
    }
    RatioMoments m;
    m.sum = size - measured + 1.0;  // imputed ones plus the identity
    m.sum_sq = m.sum;
    for (const auto& [idx, r] : layer.ratios) {
        if (idx == 0) {
            continue;
        }
        m.sum += r;
        m.sum_sq += r * r;
    }
    return m;
}

}  // namespace

double nu0_estimate(const LayerRatioData& layer) {
    layer.validate();
    if (layer.ratios.empty()) {
        throw ValidationError("cannot estimate nu0 from an empty ratio set");
    }
    return moments_with_imputation(layer).sum / static_cast<double>(pauli_space_size(layer.n));
}

double t_term(const LayerRatioData& layer) {
    layer.validate();
    const double size = static_cast<double>(pauli_space_size(layer.n));
    const RatioMoments m = moments_with_imputation(layer);
    // sum_k r_k (r_k - sum_{m != k} r_m / (4^n - 1)) == (4^n S2 - S^2)/(4^n - 1)
    const double radicand = std::max(0.0, (size * m.sum_sq - m.sum * m.sum) / (size - 1.0));
    return (size - 1.0) / size * std::sqrt(radicand);
}

double layer_distance_gamma(const LayerRatioData& layer) {
    const double nu0 = nu0_estimate(layer);
    return std::abs(1.0 - nu0) + layer.gamma - nu0;
}

double layer_distance_two(const LayerRatioData& layer) {
    const double nu0 = nu0_estimate(layer);
    return std::abs(1.0 - nu0) + t_term(layer);
}

namespace {

double weighted_layer_sum(const std::vector<LayerRatioData>& layers,
                          double (*distance)(const LayerRatioData&)) {
    double total = 0.0;
    double weight = 1.0;
    for (const auto& layer : layers) {
        total += distance(layer) * weight;
        weight *= layer.gamma;
    }
    return total;
}

}  // namespace

double delta_gamma(const std::vector<LayerRatioData>& layers) {
    return weighted_layer_sum(layers, layer_distance_gamma);
}

double delta_two(const std::vector<LayerRatioData>& layers) {
    return weighted_layer_sum(layers, layer_distance_two);
}

double delta_cptp(const std::vector<double>& nu0_per_layer) {
    double total = 0.0;
    for (double nu0 : nu0_per_layer) {
        if (!(nu0 >= 0.0 && nu0 <= 1.0)) {
            throw ValidationError("CPTP bound requires nu0 in [0, 1]");
        }
        total += 2.0 * (1.0 - nu0);
    }
    return total;
}

double worst_case_clifford(const std::vector<LayerRatioData>& layers) {
    double prod_max = 1.0;
    double prod_min = 1.0;
    for (const auto& layer : layers) {
        layer.validate();
        double rmax = 0.0;
        double rmin = 0.0;
        bool any = false;
        for (const auto& [idx, r] : layer.ratios) {
            if (idx == 0) {
                continue;
            }
            if (!any) {
                rmax = rmin = r;
                any = true;
            } else {
                rmax = std::max(rmax, r);
                rmin = std::min(rmin, r);
            }
        }
        if (!any) {
            throw ValidationError("worst-case Clifford needs at least one measured non-identity ratio per layer");
        }
        prod_max *= rmax;
        prod_min *= rmin;
    }
    return std::max(std::abs(1.0 - prod_max), std::abs(1.0 - prod_min));
}

namespace {

struct MergedTerm {
    std::uint64_t index;
    double rate_actual;
    double rate_mitigator;
};

std::vector<MergedTerm> merge_terms(const PauliLindbladModel& actual,
                                    const PauliLindbladModel& mitigator) {
    std::map<std::uint64_t, MergedTerm> merged;
    for (const auto& term : actual.terms) {
        merged[term.generator.index()] = {term.generator.index(), term.rate, 0.0};
    }
    for (const auto& term : mitigator.terms) {
        auto [it, inserted] = merged.try_emplace(term.generator.index(),
                                                 MergedTerm{term.generator.index(), 0.0, 0.0});
        (void)inserted;
        it->second.rate_mitigator = term.rate;
    }
    std::vector<MergedTerm> out;
    out.reserve(merged.size());
    for (const auto& [idx, term] : merged) {
        (void)idx;
        out.push_back(term);
    }
    return out;
}

}  // namespace

double compare_models(
    const std::vector<std::pair<PauliLindbladModel, PauliLindbladModel>>& layer_models) {
    double total = 0.0;
    double across_weight = 1.0;
    for (const auto& [actual, mitigator] : layer_models) {
        actual.validate();
        mitigator.validate();
        if (actual.n != mitigator.n) {
            throw ValidationError("compared models must share the qubit count");
        }
        const std::vector<MergedTerm> terms = merge_terms(actual, mitigator);
        double inner = 0.0;
        double within_weight = 1.0;
        double v_norm = 1.0;
        for (const auto& term : terms) {
            const double q = std::exp(-2.0 * (term.rate_actual - term.rate_mitigator));
            inner += std::abs(1.0 - q) * within_weight;
            const double w_norm = std::max(q, 1.0);
            within_weight *= w_norm;
            v_norm *= w_norm;
        }
        total += inner * across_weight;
        across_weight *= v_norm;
    }
    return total;
}

double compare_models(const PauliLindbladModel& actual, const PauliLindbladModel& mitigator,
                      int layers) {
    if (layers < 1) {
        throw ValidationError("layer count must be at least 1");
    }
    std::vector<std::pair<PauliLindbladModel, PauliLindbladModel>> seq(
        static_cast<std::size_t>(layers), {actual, mitigator});
    return compare_models(seq);
}

PeaBound pea_bound(const PauliVector& f_meas, const PauliVector& f_mod,
                   const std::vector<double>& mus, int layers) {
    f_meas.validate();
    f_mod.validate();
    if (f_meas.n != f_mod.n) {
        throw ValidationError("fidelity vectors have different qubit counts");
    }
    if (layers < 1) {
        throw ValidationError("layer count must be at least 1");
    }
    for (std::size_t i = 0; i < f_meas.size(); ++i) {
        if (!(f_meas[i] > 0.0 && f_meas[i] <= 1.0) || !(f_mod[i] > 0.0 && f_mod[i] <= 1.0)) {
            throw ValidationError("PEA bound requires fidelities in (0, 1]");
        }
    }
    const double size = static_cast<double>(f_meas.size());

    PeaBound out;
    for (double mu : mus) {
        if (mu < 0.0) {
            throw ValidationError("amplification factors must be nonnegative");
        }
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < f_meas.size(); ++i) {
            const double d = std::pow(f_meas[i], mu) - std::pow(f_mod[i], mu);
            sum += d;
            sum_sq += d * d;
        }
        const double nu0_diff = std::abs(sum) / size;
        const double radicand = std::max(0.0, (size * sum_sq - sum * sum) / (size - 1.0));
        const double t = (size - 1.0) / size * std::sqrt(radicand);
        out.eta.push_back(layers * (nu0_diff + t));
    }
    const Eigen::Index k = static_cast<Eigen::Index>(out.eta.size());
    out.sigma = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            out.sigma(i, j) = out.eta[static_cast<std::size_t>(i)] * out.eta[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

double tem_bound(const std::vector<LayerRatioData>& layers) {
    if (layers.empty()) {
        return 0.0;
    }
    const std::size_t l = layers.size();
    // prefix[k] = prod_{j<k} gamma_j
    std::vector<double> prefix(l + 1, 1.0);
    for (std::size_t j = 0; j < l; ++j) {
        prefix[j + 1] = prefix[j] * layers[j].gamma;
    }
    double total = layer_distance_two(layers[l - 1]) * prefix[l - 1];
    for (std::size_t k = 0; k + 1 < l; ++k) {
        total += layer_distance_two(layers[k]) * prefix[k + 1];
    }
    return total;
}

LineFit gls_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const Eigen::MatrixXd& sigma) {
    const Eigen::Index m = static_cast<Eigen::Index>(x.size());
    if (m < 2 || y.size() != x.size()) {
        throw ValidationError("line fit needs at least two (x, y) points");
    }
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd target(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x[static_cast<std::size_t>(i)];
        target(i) = y[static_cast<std::size_t>(i)];
    }

    Eigen::MatrixXd weight;
    if (sigma.size() == 0) {
        weight = Eigen::MatrixXd::Identity(m, m);
    } else {
        if (sigma.rows() != m || sigma.cols() != m) {
            throw ValidationError("covariance dimensions do not match the points");
        }
        // The model-violation covariance is rank one by construction, so a
        // small diagonal floor keeps the weighting positive definite.
        const double ridge = std::max(sigma.diagonal().cwiseAbs().maxCoeff() * 1e-10, 1e-30);
        Eigen::MatrixXd regularized = sigma;
        regularized.diagonal().array() += ridge;
        weight = regularized.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
    }

    const Eigen::Matrix2d normal = design.transpose() * weight * design;
    const Eigen::Vector2d rhs = design.transpose() * weight * target;
    const Eigen::Matrix2d normal_inv = normal.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::Vector2d beta = normal_inv * rhs;

    LineFit fit;
    fit.intercept = beta[0];
    fit.slope = beta[1];
    fit.covariance = normal_inv;
    return fit;
}

BoundReport build_bound_report(const std::vector<LayerRatioData>& layers) {
    if (layers.empty()) {
        throw ValidationError("bound report needs at least one layer");
    }
    BoundReport report;
    report.n = layers.front().n;
    double coverage_sum = 0.0;
    for (const auto& layer : layers) {
        if (layer.n != report.n) {
            throw ValidationError("bound report layers must share the qubit count");
        }
        LayerBreakdown row;
        row.layer_id = layer.layer_id;
        row.gamma = layer.gamma;
        row.nu0 = nu0_estimate(layer);
        row.t_term = t_term(layer);
        row.dd_gamma = layer_distance_gamma(layer);
        row.dd_2norm = layer_distance_two(layer);
        row.coverage = layer.coverage();
        coverage_sum += row.coverage;
        report.layers.push_back(std::move(row));
    }
    report.delta_gamma = delta_gamma(layers);
    report.delta_two = delta_two(layers);
    report.delta_min = std::min(report.delta_gamma, report.delta_two);
    report.worst_case_clifford = worst_case_clifford(layers);
    report.coverage_fraction = coverage_sum / static_cast<double>(layers.size());
    return report;
}

}  // namespace mvb
