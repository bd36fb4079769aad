#include "mvb/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "mvb/errors.hpp"
#include "mvb/nnls.hpp"
#include "mvb/rng.hpp"

namespace mvb {

void DecayCurve::validate() const {
    const std::size_t k = depths.size();
    if (expectations.size() != k || shots.size() != k || randomizations.size() != k) {
        throw ValidationError("decay curve arrays have mismatched lengths");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (i > 0 && depths[i] <= depths[i - 1]) {
            throw ValidationError("decay curve depths must be strictly increasing");
        }
        if (depths[i] < 0) {
            throw ValidationError("decay curve depths must be nonnegative");
        }
        if (!(expectations[i] >= -1.0 && expectations[i] <= 1.0)) {
            throw ValidationError("decay curve expectations must lie in [-1, 1]");
        }
    }
}

void LearningRecord::validate() const {
    for (const auto& [idx, est] : fidelities) {
        if (idx >= pauli_space_size(n)) {
            throw ValidationError("fidelity Pauli index out of range");
        }
        if (!(est.f_meas > 0.0) || est.f_meas > 1.0 + 1e-9) {
            throw ValidationError("measured fidelity for " + PauliString::from_index(n, idx).str() +
                                  " must lie in (0, 1]");
        }
        if (!(est.stderr_f >= 0.0)) {
            throw ValidationError("fidelity stderr must be nonnegative");
        }
    }
    for (const auto& [a, b] : degenerate_pairs) {
        const auto known = [&](const PauliString& p) {
            if (fidelities.count(p.index())) {
                return true;
            }
            if (fidelities.empty()) {
                for (const auto& curve : curves) {
                    if (curve.pauli == p) {
                        return true;
                    }
                }
            }
            return false;
        };
        if (!known(a) || !known(b)) {
            throw ValidationError("degenerate pair member missing from fidelities: " + a.str() +
                                  "," + b.str());
        }
    }
    for (const auto& p : generator_support) {
        if (p.n != n) {
            throw ValidationError("generator support qubit count mismatch");
        }
        if (p.is_identity()) {
            throw ValidationError("generator support must not contain the identity");
        }
    }
}

void RawLearningData::validate() const {
    if (shots_per_randomization <= 0) {
        throw ValidationError("raw data requires a positive shot count");
    }
    for (const auto& [pauli, per_depth] : counts) {
        if (pauli.n != n) {
            throw ValidationError("raw data Pauli qubit count mismatch");
        }
        if (per_depth.size() != depths.size()) {
            throw ValidationError("raw data depth count mismatch for " + pauli.str());
        }
        for (const auto& randomizations : per_depth) {
            if (randomizations.empty()) {
                throw ValidationError("raw data has an empty randomization ensemble");
            }
            for (int c : randomizations) {
                if (c < 0 || c > shots_per_randomization) {
                    throw ValidationError("raw count outside [0, shots]");
                }
            }
        }
    }
}

SyntheticLearningData synthesize_learning_data(const PauliStochastishChannel& truth,
                                               const std::vector<PauliString>& measured,
                                               const std::map<std::uint64_t, double>& spam,
                                               const SynthesisParams& params) {
    truth.validate();
    const PauliVector nu = wht_commutation(truth.fidelities, true);
    for (double v : nu.values) {
        if (v < -1e-12) {
            throw ValidationError("truth channel is not CPTP (negative Pauli probability)");
        }
    }
    if (params.depths.empty()) {
        throw ValidationError("at least one depth is required");
    }
    for (const auto& [idx, s] : spam) {
        if (!(s > 0.0) || s > 1.0) {
            throw ValidationError("SPAM factors must lie in (0, 1]");
        }
        (void)idx;
    }

    SyntheticLearningData out;
    if (!params.infinite_shots) {
        out.raw = RawLearningData{truth.n, "layer", params.shots, params.depths, {}};
    }

    for (std::size_t pi = 0; pi < measured.size(); ++pi) {
        const PauliString& p = measured[pi];
        const double f = truth.fidelities.at(p);
        const auto spam_it = spam.find(p.index());
        const double spam_p = spam_it == spam.end() ? 1.0 : spam_it->second;

        DecayCurve curve;
        curve.pauli = p;
        curve.depths = params.depths;
        std::vector<std::vector<int>> counts_per_depth;

        auto rng = make_rng(params.seed, pi);
        for (std::size_t di = 0; di < params.depths.size(); ++di) {
            const double mean = spam_p * std::pow(f, params.depths[di]);
            if (params.infinite_shots) {
                curve.expectations.push_back(mean);
                curve.shots.push_back(0);
                curve.randomizations.push_back(1);
                continue;
            }
            const double prob = std::clamp((1.0 + mean) / 2.0, 0.0, 1.0);
            std::binomial_distribution<int> dist(params.shots, prob);
            std::vector<int> counts(static_cast<std::size_t>(params.randomizations));
            double sum = 0.0;
            for (int r = 0; r < params.randomizations; ++r) {
                const int c = dist(rng);
                counts[static_cast<std::size_t>(r)] = c;
                sum += 2.0 * c / params.shots - 1.0;
            }
            curve.expectations.push_back(sum / params.randomizations);
            curve.shots.push_back(params.shots);
            curve.randomizations.push_back(params.randomizations);
            counts_per_depth.push_back(std::move(counts));
        }
        curve.validate();
        out.curves.push_back(curve);
        if (out.raw) {
            out.raw->counts.emplace_back(p, std::move(counts_per_depth));
        }
    }
    return out;
}

std::vector<DecayCurve> curves_from_raw(const RawLearningData& raw) {
    raw.validate();
    std::vector<DecayCurve> curves;
    for (const auto& [pauli, per_depth] : raw.counts) {
        DecayCurve curve;
        curve.pauli = pauli;
        curve.depths = raw.depths;
        for (const auto& randomizations : per_depth) {
            double sum = 0.0;
            for (int c : randomizations) {
                sum += 2.0 * c / raw.shots_per_randomization - 1.0;
            }
            curve.expectations.push_back(sum / static_cast<double>(randomizations.size()));
            curve.shots.push_back(raw.shots_per_randomization);
            curve.randomizations.push_back(static_cast<int>(randomizations.size()));
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

DecayFit fit_decay(const DecayCurve& curve) {
    curve.validate();
    const std::size_t k = curve.depths.size();
    DecayFit fit;

    // Inverse-variance weights from the binomial spread of each mean; exact
    // (shots = 0) points get unit weight.
    std::vector<double> w(k, 1.0);
    bool exact = false;
    for (std::size_t i = 0; i < k; ++i) {
        if (curve.shots[i] <= 0) {
            exact = true;
        }
    }
    if (!exact) {
        for (std::size_t i = 0; i < k; ++i) {
            const double y = curve.expectations[i];
            const double var =
                std::max(1.0 - y * y, 1e-6) /
                (static_cast<double>(curve.shots[i]) * std::max(curve.randomizations[i], 1));
            w[i] = 1.0 / var;
        }
    }

    // Log-linear initial guess over the strictly positive points.
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < k; ++i) {
        if (curve.expectations[i] > 1e-12) {
            pos.push_back(i);
        }
    }
    if (pos.size() < 2) {
        return fit;  // unusable: fewer than two positive depths
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i : pos) {
        const double d = curve.depths[i];
        const double ly = std::log(curve.expectations[i]);
        sx += d;
        sy += ly;
        sxx += d * d;
        sxy += d * ly;
    }
    const double np = static_cast<double>(pos.size());
    const double denom = np * sxx - sx * sx;
    double slope = 0.0, intercept = sy / np;
    if (std::abs(denom) > 1e-30) {
        slope = (np * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / np;
    }
    double a = std::exp(intercept);
    double f = std::clamp(std::exp(slope), 1e-12, 1.5);

    // Damped Gauss-Newton on (A, f).
    auto cost = [&](double aa, double ff) {
        double c = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double r = aa * std::pow(ff, curve.depths[i]) - curve.expectations[i];
            c += w[i] * r * r;
        }
        return c;
    };
    double lambda = 1e-8;
    double current = cost(a, f);
    for (int iter = 0; iter < 100; ++iter) {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const int d = curve.depths[i];
            const double fd = std::pow(f, d);
            const double ja = fd;
            const double jf = d == 0 ? 0.0 : a * d * std::pow(f, d - 1);
            const double r = a * fd - curve.expectations[i];
            jtj00 += w[i] * ja * ja;
            jtj01 += w[i] * ja * jf;
            jtj11 += w[i] * jf * jf;
            jtr0 += w[i] * ja * r;
            jtr1 += w[i] * jf * r;
        }
        const double d00 = jtj00 * (1 + lambda);
        const double d11 = jtj11 * (1 + lambda);
        const double det = d00 * d11 - jtj01 * jtj01;
        if (std::abs(det) < 1e-300) {
            break;
        }
        const double step_a = (-jtr0 * d11 + jtr1 * jtj01) / det;
        const double step_f = (-jtr1 * d00 + jtr0 * jtj01) / det;
        const double a_new = a + step_a;
        const double f_new = std::clamp(f + step_f, 1e-12, 1.5);
        const double c_new = cost(a_new, f_new);
        if (c_new <= current) {
            const bool converged = std::abs(step_a) < 1e-13 * std::max(std::abs(a), 1.0) &&
                                   std::abs(step_f) < 1e-13 * std::max(std::abs(f), 1.0);
            a = a_new;
            f = f_new;
            current = c_new;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (converged) {
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                break;
            }
        }
    }

    // Local curvature at the solution gives the parameter covariance; with
    // uniform weights it is scaled by the residual variance instead.
    double jtj00 = 0, jtj01 = 0, jtj11 = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const int d = curve.depths[i];
        const double ja = std::pow(f, d);
        const double jf = d == 0 ? 0.0 : a * d * std::pow(f, d - 1);
        jtj00 += w[i] * ja * ja;
        jtj01 += w[i] * ja * jf;
        jtj11 += w[i] * jf * jf;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    double var_f = det > 1e-300 ? jtj00 / det : 0.0;
    if (exact) {
        var_f *= current / std::max<double>(k > 2 ? k - 2 : 1, 1);
    }

    fit.ok = true;
    fit.amplitude = a;
    fit.fidelity = std::clamp(f, 1e-15, 1.0);
    fit.stderr_f = var_f > 0 ? std::sqrt(var_f) : 0.0;
    return fit;
}

std::map<std::uint64_t, FidelityEstimate> fidelities_from_curves(const std::vector<DecayCurve>& curves) {
    std::map<std::uint64_t, FidelityEstimate> out;
    for (const auto& curve : curves) {
        const DecayFit fit = fit_decay(curve);
        if (fit.ok) {
            out[curve.pauli.index()] = FidelityEstimate{fit.fidelity, fit.stderr_f};
        }
    }
    return out;
}

void resolve_degeneracy(std::map<std::uint64_t, FidelityEstimate>& fidelities,
                        const std::vector<std::pair<PauliString, PauliString>>& pairs) {
    for (const auto& [a, b] : pairs) {
        auto ia = fidelities.find(a.index());
        auto ib = fidelities.find(b.index());
        if (ia == fidelities.end() || ib == fidelities.end()) {
            throw ValidationError("degenerate pair member missing: " + a.str() + "," + b.str());
        }
        const double fa = ia->second.f_meas;
        const double fb = ib->second.f_meas;
        if (!(fa >= 0.0) || !(fb >= 0.0)) {
            throw ValidationError("degenerate pair fidelities must be nonnegative");
        }
        const double g = std::sqrt(fa * fb);
        double sigma_g = 0.0;
        if (g > 0.0) {
            const double da = g / (2.0 * fa);
            const double db = g / (2.0 * fb);
            sigma_g = std::sqrt(da * da * ia->second.stderr_f * ia->second.stderr_f +
                                db * db * ib->second.stderr_f * ib->second.stderr_f);
        }
        ia->second = FidelityEstimate{g, sigma_g};
        ib->second = FidelityEstimate{g, sigma_g};
    }
}

ModelFitResult fit_model_nnls(const LearningRecord& record, FitWeighting weighting) {
    record.validate();
    if (record.generator_support.empty()) {
        throw NumericalError("empty generator support in model fit");
    }
    if (record.fidelities.empty()) {
        throw NumericalError("no fidelities to fit");
    }

    const Eigen::Index rows = static_cast<Eigen::Index>(record.fidelities.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(record.generator_support.size());
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    Eigen::Index r = 0;
    for (const auto& [idx, est] : record.fidelities) {
        const PauliString p = PauliString::from_index(record.n, idx);
        double weight = 1.0;
        if (weighting == FitWeighting::variance && est.stderr_f > 0.0) {
            // var[-ln(f)/2] = sigma^2 / (4 f^2)
            weight = 2.0 * est.f_meas / est.stderr_f;
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            design(r, c) = weight * symplectic_product(p, record.generator_support[c]);
        }
        target(r) = weight * (-0.5 * std::log(est.f_meas));
        ++r;
    }
    if (design.cwiseAbs().maxCoeff() == 0.0) {
        throw NumericalError("singular design matrix: no generator anticommutes with any fidelity");
    }

    const NnlsResult sol = nnls(design, target);

    ModelFitResult result;
    result.model.n = record.n;
    result.model.layer_id = record.layer_id;
    for (Eigen::Index c = 0; c < cols; ++c) {
        result.model.terms.push_back({record.generator_support[c], std::max(sol.x[c], 0.0)});
    }
    result.rate_covariance = Eigen::MatrixXd::Zero(cols, cols);
    for (const auto& [idx, est] : record.fidelities) {
        const PauliString p = PauliString::from_index(record.n, idx);
        result.residuals[idx] = est.f_meas - model_fidelity(result.model, p);
    }
    return result;
}

BootstrapResult bootstrap(const RawLearningData& raw,
                          const std::vector<std::pair<PauliString, PauliString>>& degenerate_pairs,
                          const std::vector<PauliString>& generator_support, int n_reps,
                          std::uint64_t seed, FitWeighting weighting) {
    raw.validate();
    if (raw.counts.empty()) {
        throw ValidationError("raw learning data is empty; fidelity-only records cannot be bootstrapped");
    }
    if (n_reps < 2) {
        throw ValidationError("bootstrap requires at least 2 replicas");
    }

    const Eigen::Index n_terms = static_cast<Eigen::Index>(generator_support.size());
    std::vector<Eigen::VectorXd> rates(static_cast<std::size_t>(n_reps));
    std::vector<std::map<std::uint64_t, double>> fmeas(static_cast<std::size_t>(n_reps));
    std::vector<char> ok(static_cast<std::size_t>(n_reps), 0);

#pragma omp parallel for schedule(dynamic)
    for (int rep = 0; rep < n_reps; ++rep) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(rep));
        RawLearningData resampled = raw;
        for (auto& [pauli, per_depth] : resampled.counts) {
            (void)pauli;
            for (auto& counts : per_depth) {
                const std::size_t nr = counts.size();
                std::uniform_int_distribution<std::size_t> pick(0, nr - 1);
                std::vector<int> redrawn(nr);
                for (std::size_t i = 0; i < nr; ++i) {
                    const int base = counts[pick(rng)];
                    const double prob = static_cast<double>(base) / raw.shots_per_randomization;
                    std::binomial_distribution<int> dist(raw.shots_per_randomization, prob);
                    redrawn[i] = dist(rng);
                }
                counts = std::move(redrawn);
            }
        }
        LearningRecord record;
        record.n = raw.n;
        record.layer_id = raw.layer_id;
        record.fidelities = fidelities_from_curves(curves_from_raw(resampled));
        record.generator_support = generator_support;
        bool pairs_present = true;
        for (const auto& [a, b] : degenerate_pairs) {
            if (!record.fidelities.count(a.index()) || !record.fidelities.count(b.index())) {
                pairs_present = false;
            }
        }
        if (pairs_present) {
            resolve_degeneracy(record.fidelities, degenerate_pairs);
            record.degenerate_pairs = degenerate_pairs;
        }
        try {
            const ModelFitResult fit = fit_model_nnls(record, weighting);
            Eigen::VectorXd lambda(n_terms);
            for (Eigen::Index c = 0; c < n_terms; ++c) {
                lambda[c] = fit.model.terms[static_cast<std::size_t>(c)].rate;
            }
            rates[static_cast<std::size_t>(rep)] = lambda;
            for (const auto& [idx, est] : record.fidelities) {
                fmeas[static_cast<std::size_t>(rep)][idx] = est.f_meas;
            }
            ok[static_cast<std::size_t>(rep)] = 1;
        } catch (const NumericalError&) {
            ok[static_cast<std::size_t>(rep)] = 0;
        }
    }

    std::vector<std::size_t> kept;
    for (std::size_t rep = 0; rep < static_cast<std::size_t>(n_reps); ++rep) {
        if (ok[rep]) {
            kept.push_back(rep);
        }
    }
    if (kept.size() < 2) {
        throw NumericalError("bootstrap produced fewer than 2 successful replicas");
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_terms);
    for (std::size_t rep : kept) {
        mean += rates[rep];
    }
    mean /= static_cast<double>(kept.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n_terms, n_terms);
    for (std::size_t rep : kept) {
        const Eigen::VectorXd d = rates[rep] - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(kept.size() - 1);

    BootstrapResult out;
    out.fit.model.n = raw.n;
    out.fit.model.layer_id = raw.layer_id;
    for (Eigen::Index c = 0; c < n_terms; ++c) {
        out.fit.model.terms.push_back({generator_support[static_cast<std::size_t>(c)],
                                       std::max(mean[c], 0.0)});
    }
    out.fit.rate_covariance = cov;
    out.fit.bootstrap_reps = static_cast<int>(kept.size());

    // Point estimates from the unresampled data give the reported residuals.
    auto point = fidelities_from_curves(curves_from_raw(raw));
    bool pairs_present = true;
    for (const auto& [a, b] : degenerate_pairs) {
        if (!point.count(a.index()) || !point.count(b.index())) {
            pairs_present = false;
        }
    }
    if (pairs_present) {
        resolve_degeneracy(point, degenerate_pairs);
    }
    for (const auto& [idx, est] : point) {
        out.fit.residuals[idx] =
            est.f_meas - model_fidelity(out.fit.model, PauliString::from_index(raw.n, idx));
    }

    for (const auto& [idx, est] : point) {
        (void)est;
        double sum = 0.0, sumsq = 0.0;
        std::size_t count = 0;
        for (std::size_t rep : kept) {
            auto it = fmeas[rep].find(idx);
            if (it != fmeas[rep].end()) {
                sum += it->second;
                sumsq += it->second * it->second;
                ++count;
            }
        }
        if (count >= 2) {
            const double m = sum / static_cast<double>(count);
            const double var = std::max(0.0, (sumsq - count * m * m) / static_cast<double>(count - 1));
            out.sigma_f_meas[idx] = std::sqrt(var);
        } else {
            out.sigma_f_meas[idx] = 0.0;
        }
    }
    return out;
}

ModelPrediction model_prediction_sigma(const std::map<std::string, ModelFitResult>& fits,
                                       const std::vector<LayerOccurrence>& path) {
    // Anticommuting term indices per occurrence, grouped by layer identity.
    struct Occurrence {
        const ModelFitResult* fit;
        std::vector<Eigen::Index> terms;
        std::string layer_id;
    };
    std::vector<Occurrence> occs;
    double f_mod = 1.0;
    for (const auto& occ : path) {
        auto it = fits.find(occ.layer_id);
        if (it == fits.end()) {
            throw ValidationError("no fit result for layer '" + occ.layer_id + "'");
        }
        const ModelFitResult& fit = it->second;
        if (fit.model.n != occ.pauli.n) {
            throw ValidationError("path Pauli qubit count does not match layer model");
        }
        Occurrence o{&fit, {}, occ.layer_id};
        for (std::size_t t = 0; t < fit.model.terms.size(); ++t) {
            if (symplectic_product(occ.pauli, fit.model.terms[t].generator)) {
                o.terms.push_back(static_cast<Eigen::Index>(t));
            }
        }
        f_mod *= model_fidelity(fit.model, occ.pauli);
        occs.push_back(std::move(o));
    }

    // Occurrences of the same layer share rate draws: their cross blocks are
    // the layer covariance itself. Distinct layers are independent.
    double total = 0.0;
    for (const auto& a : occs) {
        for (const auto& b : occs) {
            if (a.layer_id != b.layer_id) {
                continue;
            }
            const Eigen::MatrixXd& cov = a.fit->rate_covariance;
            if (cov.rows() == 0) {
                continue;
            }
            for (Eigen::Index i : a.terms) {
                for (Eigen::Index j : b.terms) {
                    total += cov(i, j);
                }
            }
        }
    }
    ModelPrediction out;
    out.f_mod = f_mod;
    out.sigma = 2.0 * f_mod * std::sqrt(std::max(total, 0.0));
    return out;
}

double ratio_sigma(double f_meas, double sigma_meas, double f_mod, double sigma_mod) {
    if (!(f_meas > 0.0) || !(f_mod > 0.0)) {
        throw ValidationError("ratio_sigma requires positive fidelities");
    }
    const double r = f_meas / f_mod;
    const double a = sigma_meas / f_meas;
    const double b = sigma_mod / f_mod;
    return r * std::sqrt(a * a + b * b);
}

}  // namespace mvb
