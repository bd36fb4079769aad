#include "mvb/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvb/errors.hpp"

namespace mvb {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) {
        throw ValidationError(path.empty() ? std::string("/: expected an object")
                                           : path + ": expected an object");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError(path + "/" + key + ": missing required field");
    }
    return *it;
}

double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw ValidationError(path + ": expected a number");
    }
    return j.get<double>();
}

std::int64_t require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw ValidationError(path + ": expected an integer");
    }
    return j.get<std::int64_t>();
}

std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw ValidationError(path + ": expected a string");
    }
    return j.get<std::string>();
}

const json& require_array(const json& j, const std::string& path) {
    if (!j.is_array()) {
        throw ValidationError(path + ": expected an array");
    }
    return j;
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw ValidationError(path + ": expected an object");
    }
    return j;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ValidationError(path + ": invalid JSON");
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path);
    }
    out << contents;
}

namespace {

PauliString parse_pauli_field(const json& j, int n, const std::string& path) {
    const std::string text = require_string(j, path);
    PauliString p;
    try {
        p = PauliString::parse(text);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (p.n != n) {
        throw ValidationError(path + ": Pauli length does not match n");
    }
    return p;
}

}  // namespace

json model_to_json(const PauliLindbladModel& m) {
    json terms = json::array();
    for (const auto& term : m.terms) {
        terms.push_back({{"pauli", term.generator.str()}, {"rate", term.rate}});
    }
    return json{{"n", m.n}, {"layer_id", m.layer_id}, {"terms", std::move(terms)}};
}

PauliLindbladModel model_from_json(const json& j, const std::string& path) {
    PauliLindbladModel m;
    m.n = static_cast<int>(require_int(require_field(j, "n", path), path + "/n"));
    m.layer_id = require_string(require_field(j, "layer_id", path), path + "/layer_id");
    const json& terms = require_array(require_field(j, "terms", path), path + "/terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string term_path = path + "/terms/" + std::to_string(i);
        const json& term = require_object(terms[i], term_path);
        const PauliString p =
            parse_pauli_field(require_field(term, "pauli", term_path), m.n, term_path + "/pauli");
        const double rate = require_number(require_field(term, "rate", term_path), term_path + "/rate");
        if (rate < 0.0) {
            throw ValidationError(term_path + "/rate: must be nonnegative");
        }
        m.terms.push_back({p, rate});
    }
    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return m;
}

json channel_to_json(const PauliStochastishChannel& c) {
    json fidelities = json::object();
    for (std::size_t idx = 1; idx < c.fidelities.size(); ++idx) {
        if (c.fidelities[idx] != 1.0) {
            fidelities[PauliString::from_index(c.n, idx).str()] = c.fidelities[idx];
        }
    }
    return json{{"n", c.n}, {"fidelities", std::move(fidelities)}};
}

PauliStochastishChannel channel_from_json(const json& j, const std::string& path) {
    const int n = static_cast<int>(require_int(require_field(j, "n", path), path + "/n"));
    if (n < 1 || n > kMaxDenseQubits) {
        throw ValidationError(path + "/n: qubit count out of range");
    }
    PauliVector f = PauliVector::constant(n, 1.0);
    const json& map = require_object(require_field(j, "fidelities", path), path + "/fidelities");
    for (auto it = map.begin(); it != map.end(); ++it) {
        const std::string entry_path = path + "/fidelities/" + it.key();
        PauliString p;
        try {
            p = PauliString::parse(it.key());
        } catch (const ValidationError& e) {
            throw ValidationError(entry_path + ": " + e.what());
        }
        if (p.n != n) {
            throw ValidationError(entry_path + ": Pauli length does not match n");
        }
        if (p.is_identity()) {
            const double v = require_number(*it, entry_path);
            if (v != 1.0) {
                throw ValidationError(entry_path + ": identity fidelity must be 1");
            }
            continue;
        }
        f.at(p) = require_number(*it, entry_path);
    }
    return PauliStochastishChannel::from_fidelities(std::move(f));
}

json learning_record_to_json(const LearningRecord& record) {
    json fidelities = json::array();
    for (const auto& [idx, est] : record.fidelities) {
        fidelities.push_back({{"pauli", PauliString::from_index(record.n, idx).str()},
                              {"f_meas", est.f_meas},
                              {"stderr", est.stderr_f}});
    }
    json pairs = json::array();
    for (const auto& [a, b] : record.degenerate_pairs) {
        pairs.push_back(json::array({a.str(), b.str()}));
    }
    json support = json::array();
    for (const auto& p : record.generator_support) {
        support.push_back(p.str());
    }
    json out{{"n", record.n},
             {"layer_id", record.layer_id},
             {"fidelities", std::move(fidelities)},
             {"degenerate_pairs", std::move(pairs)},
             {"generator_support", std::move(support)}};
    if (!record.curves.empty()) {
        json curves = json::array();
        for (const auto& curve : record.curves) {
            curves.push_back({{"pauli", curve.pauli.str()},
                              {"depths", curve.depths},
                              {"expectations", curve.expectations},
                              {"shots", curve.shots},
                              {"randomizations", curve.randomizations}});
        }
        out["curves"] = std::move(curves);
    }
    return out;
}

LearningRecord learning_record_from_json(const json& j, const std::string& path) {
    LearningRecord record;
    record.n = static_cast<int>(require_int(require_field(j, "n", path), path + "/n"));
    if (record.n < 1 || record.n > kMaxDenseQubits) {
        throw ValidationError(path + "/n: qubit count out of range");
    }
    record.layer_id = require_string(require_field(j, "layer_id", path), path + "/layer_id");

    const json& fidelities =
        require_array(require_field(j, "fidelities", path), path + "/fidelities");
    for (std::size_t i = 0; i < fidelities.size(); ++i) {
        const std::string entry_path = path + "/fidelities/" + std::to_string(i);
        const json& entry = require_object(fidelities[i], entry_path);
        const PauliString p = parse_pauli_field(require_field(entry, "pauli", entry_path),
                                                record.n, entry_path + "/pauli");
        FidelityEstimate est;
        est.f_meas = require_number(require_field(entry, "f_meas", entry_path), entry_path + "/f_meas");
        if (entry.contains("stderr")) {
            est.stderr_f = require_number(entry["stderr"], entry_path + "/stderr");
        }
        record.fidelities[p.index()] = est;
    }

    if (j.contains("degenerate_pairs")) {
        const json& pairs = require_array(j["degenerate_pairs"], path + "/degenerate_pairs");
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const std::string pair_path = path + "/degenerate_pairs/" + std::to_string(i);
            const json& pair = require_array(pairs[i], pair_path);
            if (pair.size() != 2) {
                throw ValidationError(pair_path + ": expected exactly two Paulis");
            }
            record.degenerate_pairs.emplace_back(
                parse_pauli_field(pair[0], record.n, pair_path + "/0"),
                parse_pauli_field(pair[1], record.n, pair_path + "/1"));
        }
    }

    const json& support =
        require_array(require_field(j, "generator_support", path), path + "/generator_support");
    for (std::size_t i = 0; i < support.size(); ++i) {
        record.generator_support.push_back(parse_pauli_field(
            support[i], record.n, path + "/generator_support/" + std::to_string(i)));
    }

    if (j.contains("curves")) {
        const json& curves = require_array(j["curves"], path + "/curves");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const std::string curve_path = path + "/curves/" + std::to_string(i);
            const json& cj = require_object(curves[i], curve_path);
            DecayCurve curve;
            curve.pauli = parse_pauli_field(require_field(cj, "pauli", curve_path), record.n,
                                            curve_path + "/pauli");
            for (const auto& d : require_array(require_field(cj, "depths", curve_path),
                                               curve_path + "/depths")) {
                curve.depths.push_back(static_cast<int>(require_int(d, curve_path + "/depths")));
            }
            for (const auto& e : require_array(require_field(cj, "expectations", curve_path),
                                               curve_path + "/expectations")) {
                curve.expectations.push_back(require_number(e, curve_path + "/expectations"));
            }
            for (const auto& s : require_array(require_field(cj, "shots", curve_path),
                                               curve_path + "/shots")) {
                curve.shots.push_back(require_int(s, curve_path + "/shots"));
            }
            for (const auto& r : require_array(require_field(cj, "randomizations", curve_path),
                                               curve_path + "/randomizations")) {
                curve.randomizations.push_back(
                    static_cast<int>(require_int(r, curve_path + "/randomizations")));
            }
            try {
                curve.validate();
            } catch (const ValidationError& e) {
                throw ValidationError(curve_path + ": " + e.what());
            }
            record.curves.push_back(std::move(curve));
        }
    }

    try {
        record.validate();
    } catch (const ValidationError& e) {
        throw ValidationError((path.empty() ? "/" : path) + ": " + e.what());
    }
    return record;
}

json raw_learning_data_to_json(const RawLearningData& raw) {
    json measurements = json::array();
    for (const auto& [pauli, per_depth] : raw.counts) {
        measurements.push_back({{"pauli", pauli.str()}, {"counts_per_depth", per_depth}});
    }
    return json{{"n", raw.n},
                {"layer_id", raw.layer_id},
                {"shots", raw.shots_per_randomization},
                {"depths", raw.depths},
                {"measurements", std::move(measurements)}};
}

RawLearningData raw_learning_data_from_json(const json& j, const std::string& path) {
    RawLearningData raw;
    raw.n = static_cast<int>(require_int(require_field(j, "n", path), path + "/n"));
    raw.layer_id = require_string(require_field(j, "layer_id", path), path + "/layer_id");
    raw.shots_per_randomization =
        static_cast<int>(require_int(require_field(j, "shots", path), path + "/shots"));
    for (const auto& d : require_array(require_field(j, "depths", path), path + "/depths")) {
        raw.depths.push_back(static_cast<int>(require_int(d, path + "/depths")));
    }
    const json& measurements =
        require_array(require_field(j, "measurements", path), path + "/measurements");
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const std::string m_path = path + "/measurements/" + std::to_string(i);
        const json& m = require_object(measurements[i], m_path);
        const PauliString p =
            parse_pauli_field(require_field(m, "pauli", m_path), raw.n, m_path + "/pauli");
        std::vector<std::vector<int>> per_depth;
        const json& cpd =
            require_array(require_field(m, "counts_per_depth", m_path), m_path + "/counts_per_depth");
        for (std::size_t d = 0; d < cpd.size(); ++d) {
            const std::string d_path = m_path + "/counts_per_depth/" + std::to_string(d);
            std::vector<int> counts;
            for (const auto& c : require_array(cpd[d], d_path)) {
                counts.push_back(static_cast<int>(require_int(c, d_path)));
            }
            per_depth.push_back(std::move(counts));
        }
        raw.counts.emplace_back(p, std::move(per_depth));
    }
    try {
        raw.validate();
    } catch (const ValidationError& e) {
        throw ValidationError((path.empty() ? "/" : path) + ": " + e.what());
    }
    return raw;
}

json fit_result_to_json(const ModelFitResult& fit, const PauliLindbladModel& model_for_terms) {
    json residuals = json::array();
    for (const auto& [idx, r] : fit.residuals) {
        residuals.push_back(
            {{"pauli", PauliString::from_index(fit.model.n, idx).str()}, {"residual", r}});
    }
    json out{{"model", model_to_json(model_for_terms)},
             {"residuals", std::move(residuals)},
             {"bootstrap_reps", fit.bootstrap_reps}};
    if (fit.rate_covariance.size() > 0 && fit.rate_covariance.cwiseAbs().maxCoeff() > 0.0) {
        json cov = json::array();
        for (Eigen::Index r = 0; r < fit.rate_covariance.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < fit.rate_covariance.cols(); ++c) {
                row.push_back(fit.rate_covariance(r, c));
            }
            cov.push_back(std::move(row));
        }
        out["rate_covariance"] = std::move(cov);
    }
    return out;
}

Eigen::MatrixXd covariance_from_json(const json& j, std::size_t terms, const std::string& path) {
    const json& rows = require_array(j, path);
    if (rows.size() != terms) {
        throw ValidationError(path + ": covariance dimension does not match model terms");
    }
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(terms), static_cast<Eigen::Index>(terms));
    for (std::size_t r = 0; r < terms; ++r) {
        const json& row = require_array(rows[r], path + "/" + std::to_string(r));
        if (row.size() != terms) {
            throw ValidationError(path + "/" + std::to_string(r) + ": ragged covariance row");
        }
        for (std::size_t c = 0; c < terms; ++c) {
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                require_number(row[c], path + "/" + std::to_string(r));
        }
    }
    return cov;
}

json bound_report_to_json(const BoundReport& report) {
    json layers = json::array();
    for (const auto& layer : report.layers) {
        layers.push_back({{"layer_id", layer.layer_id},
                          {"gamma", layer.gamma},
                          {"nu0", layer.nu0},
                          {"t_term", layer.t_term},
                          {"dd_gamma", layer.dd_gamma},
                          {"dd_2norm", layer.dd_2norm},
                          {"coverage", layer.coverage}});
    }
    return json{{"n", report.n},
                {"depth", report.layers.size()},
                {"layers", std::move(layers)},
                {"totals",
                 {{"delta_gamma", report.delta_gamma},
                  {"delta_two", report.delta_two},
                  {"delta_min", report.delta_min},
                  {"worst_case_clifford", report.worst_case_clifford}}},
                {"coverage_fraction", report.coverage_fraction}};
}

std::string bound_report_to_csv(const BoundReport& report) {
    std::ostringstream out;
    out << "layer,layer_id,gamma,nu0,t_term,dd_gamma,dd_2norm,coverage\n";
    for (std::size_t i = 0; i < report.layers.size(); ++i) {
        const auto& layer = report.layers[i];
        out << i << ',' << layer.layer_id << ',' << format_double(layer.gamma) << ','
            << format_double(layer.nu0) << ',' << format_double(layer.t_term) << ','
            << format_double(layer.dd_gamma) << ',' << format_double(layer.dd_2norm) << ','
            << format_double(layer.coverage) << '\n';
    }
    return out.str();
}

json quartiles_to_json(const Quartiles& q) {
    return json{{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

}  // namespace mvb
