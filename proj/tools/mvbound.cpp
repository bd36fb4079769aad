#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>
#include <openssl/evp.h>

#include "mvb/bounds.hpp"
#include "mvb/errors.hpp"
#include "mvb/experiments.hpp"
#include "mvb/learning.hpp"
#include "mvb/serialization.hpp"

namespace fs = std::filesystem;
using mvb::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw mvb::ValidationError("cannot open " + path);
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[65536];
    while (in.read(buf, sizeof(buf)), in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

// Shared per-run bookkeeping: resolved options, hashed inputs, output names.
struct RunContext {
    std::string command;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string format = "json";
    json config = json::object();
    json inputs = json::array();
    std::vector<std::string> outputs;

    void add_input(const std::string& path) {
        inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    }

    void write_output(const std::string& name, const std::string& contents) {
        fs::create_directories(out_dir);
        mvb::write_text_file((fs::path(out_dir) / name).string(), contents);
        outputs.push_back(name);
    }

    void write_json(const std::string& name, const json& j) {
        write_output(name, j.dump(2) + "\n");
    }

    void finish() {
        json manifest{{"tool", "mvbound"},
                      {"version", kToolVersion},
                      {"command", command},
                      {"seed", seed ? json(*seed) : json(nullptr)},
                      {"config", config},
                      {"inputs", inputs},
                      {"outputs", outputs}};
        fs::create_directories(out_dir);
        mvb::write_text_file((fs::path(out_dir) / "manifest.json").string(),
                             manifest.dump(2) + "\n");
    }
};

struct LayersSpec {
    int from = 1;
    int to = 1;  // single mode when from == to
    bool scaling() const { return from != to; }
};

LayersSpec parse_layers_spec(const std::string& text) {
    LayersSpec spec;
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            spec.from = spec.to = std::stoi(text);
        } else {
            spec.from = std::stoi(text.substr(0, dots));
            spec.to = std::stoi(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw mvb::ValidationError("--layers expects N or A..B, got '" + text + "'");
    }
    if (spec.from < 1 || spec.to < spec.from) {
        throw mvb::ValidationError("--layers range must satisfy 1 <= A <= B");
    }
    return spec;
}

// Measured ratio data plus per-Pauli diagnostics for a record mitigated by a
// model: ratios, degeneracy membership, and the over-1-sigma flag when
// uncertainty information is available.
struct RecordAnalysis {
    mvb::LayerRatioData layer;
    json tags = json::array();
};

RecordAnalysis analyze_record(const mvb::LearningRecord& record,
                              const mvb::PauliLindbladModel& model,
                              const Eigen::MatrixXd& covariance) {
    if (record.n != model.n) {
        throw mvb::ValidationError("record and model qubit counts differ");
    }
    if (record.layer_id != model.layer_id) {
        throw mvb::ValidationError("record layer '" + record.layer_id +
                                   "' does not match model layer '" + model.layer_id + "'");
    }
    auto fidelities = record.fidelities;
    mvb::resolve_degeneracy(fidelities, record.degenerate_pairs);

    mvb::ModelFitResult fit;
    fit.model = model;
    fit.rate_covariance = covariance;
    std::map<std::string, mvb::ModelFitResult> fits;
    fits[model.layer_id] = fit;
    const bool have_covariance = covariance.size() > 0 && covariance.cwiseAbs().maxCoeff() > 0.0;

    RecordAnalysis out;
    out.layer.n = record.n;
    out.layer.layer_id = record.layer_id;
    out.layer.gamma = mvb::gamma(model);
    for (const auto& [idx, est] : fidelities) {
        const auto p = mvb::PauliString::from_index(record.n, idx);
        const double f_mod = mvb::model_fidelity(model, p);
        const double ratio = est.f_meas / f_mod;
        if (!p.is_identity()) {
            out.layer.ratios[idx] = ratio;
        }

        bool degenerate = false;
        for (const auto& [a, b] : record.degenerate_pairs) {
            degenerate |= (a == p || b == p);
        }
        json tag{{"pauli", p.str()},
                 {"f_meas", est.f_meas},
                 {"stderr", est.stderr_f},
                 {"f_mod", f_mod},
                 {"ratio", ratio},
                 {"degenerate", degenerate}};
        double sigma_mod = 0.0;
        if (have_covariance) {
            sigma_mod = mvb::model_prediction_sigma(fits, {{model.layer_id, p}}).sigma;
        }
        if (est.stderr_f > 0.0 || sigma_mod > 0.0) {
            const double sigma = mvb::ratio_sigma(est.f_meas, est.stderr_f, f_mod, sigma_mod);
            tag["sigma_ratio"] = sigma;
            tag["over_one_sigma"] = std::abs(1.0 - ratio) > sigma;
        } else {
            tag["sigma_ratio"] = nullptr;
            tag["over_one_sigma"] = nullptr;
        }
        out.tags.push_back(std::move(tag));
    }
    if (out.layer.ratios.empty()) {
        throw mvb::ValidationError("record contains no non-identity fidelities");
    }
    return out;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(RunContext& ctx, const std::string& record_path, const std::string& raw_path,
            int bootstrap_reps, const std::string& weighting_name) {
    const mvb::FitWeighting weighting = weighting_name == "variance"
                                            ? mvb::FitWeighting::variance
                                            : mvb::FitWeighting::uniform;
    ctx.add_input(record_path);
    mvb::LearningRecord record = mvb::learning_record_from_json(
        mvb::parse_json_file(record_path));
    if (record.generator_support.empty()) {
        throw mvb::ValidationError("/generator_support: must not be empty");
    }
    if (record.fidelities.empty() && !record.curves.empty()) {
        record.fidelities = mvb::fidelities_from_curves(record.curves);
    }
    mvb::resolve_degeneracy(record.fidelities, record.degenerate_pairs);

    const mvb::ModelFitResult fit = mvb::fit_model_nnls(record, weighting);
    json report = mvb::fit_result_to_json(fit, fit.model);

    if (bootstrap_reps > 0) {
        if (raw_path.empty()) {
            throw mvb::ValidationError("--bootstrap requires --raw data; "
                                       "fidelity-only records cannot be bootstrapped");
        }
        ctx.add_input(raw_path);
        const mvb::RawLearningData raw =
            mvb::raw_learning_data_from_json(mvb::parse_json_file(raw_path));
        const mvb::BootstrapResult boot = mvb::bootstrap(
            raw, record.degenerate_pairs, record.generator_support, bootstrap_reps,
            ctx.seed.value_or(0), weighting);
        json rates = json::array();
        for (const auto& term : boot.fit.model.terms) {
            rates.push_back({{"pauli", term.generator.str()}, {"rate", term.rate}});
        }
        json cov = json::array();
        for (Eigen::Index r = 0; r < boot.fit.rate_covariance.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < boot.fit.rate_covariance.cols(); ++c) {
                row.push_back(boot.fit.rate_covariance(r, c));
            }
            cov.push_back(std::move(row));
        }
        json sigmas = json::array();
        for (const auto& [idx, s] : boot.sigma_f_meas) {
            sigmas.push_back(
                {{"pauli", mvb::PauliString::from_index(raw.n, idx).str()}, {"sigma", s}});
        }
        report["bootstrap"] = {{"reps", boot.fit.bootstrap_reps},
                               {"mean_rates", std::move(rates)},
                               {"rate_covariance", std::move(cov)},
                               {"sigma_f_meas", std::move(sigmas)}};
    }

    ctx.write_json("model.json", mvb::model_to_json(fit.model));
    ctx.write_json("fit_report.json", report);
    ctx.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// bounds / tem-bound shared loading

struct BoundInputs {
    mvb::LearningRecord record;
    mvb::PauliLindbladModel model;
    Eigen::MatrixXd covariance;
};

BoundInputs load_bound_inputs(RunContext& ctx, const std::string& record_path,
                              const std::string& model_path, const std::string& fit_report_path) {
    BoundInputs in;
    ctx.add_input(record_path);
    ctx.add_input(model_path);
    in.record = mvb::learning_record_from_json(mvb::parse_json_file(record_path));
    if (in.record.fidelities.empty() && !in.record.curves.empty()) {
        in.record.fidelities = mvb::fidelities_from_curves(in.record.curves);
    }
    in.model = mvb::model_from_json(mvb::parse_json_file(model_path));
    if (!fit_report_path.empty()) {
        ctx.add_input(fit_report_path);
        const json report = mvb::parse_json_file(fit_report_path);
        const json* cov = nullptr;
        if (report.contains("bootstrap") && report["bootstrap"].contains("rate_covariance")) {
            cov = &report["bootstrap"]["rate_covariance"];
        } else if (report.contains("rate_covariance")) {
            cov = &report["rate_covariance"];
        }
        if (cov != nullptr) {
            in.covariance = mvb::covariance_from_json(*cov, in.model.terms.size(),
                                                      "/rate_covariance");
        }
    }
    return in;
}

int cmd_bounds(RunContext& ctx, const std::string& record_path, const std::string& model_path,
               const std::string& fit_report_path, const std::string& layers_text) {
    const LayersSpec spec = parse_layers_spec(layers_text);
    const BoundInputs in = load_bound_inputs(ctx, record_path, model_path, fit_report_path);
    const RecordAnalysis analysis = analyze_record(in.record, in.model, in.covariance);

    json out;
    std::string csv;
    if (!spec.scaling()) {
        const std::vector<mvb::LayerRatioData> layers(static_cast<std::size_t>(spec.to),
                                                      analysis.layer);
        const mvb::BoundReport report = mvb::build_bound_report(layers);
        out = mvb::bound_report_to_json(report);
        out["fidelities"] = analysis.tags;
        csv = mvb::bound_report_to_csv(report);
    } else {
        json points = json::array();
        std::ostringstream csv_out;
        csv_out << "depth,delta_gamma,delta_two,delta_min,worst_case_clifford\n";
        for (int depth = spec.from; depth <= spec.to; ++depth) {
            const std::vector<mvb::LayerRatioData> layers(static_cast<std::size_t>(depth),
                                                          analysis.layer);
            const mvb::BoundReport report = mvb::build_bound_report(layers);
            points.push_back({{"depth", depth},
                              {"delta_gamma", report.delta_gamma},
                              {"delta_two", report.delta_two},
                              {"delta_min", report.delta_min},
                              {"worst_case_clifford", report.worst_case_clifford}});
            csv_out << depth << ',' << mvb::format_double(report.delta_gamma) << ','
                    << mvb::format_double(report.delta_two) << ','
                    << mvb::format_double(report.delta_min) << ','
                    << mvb::format_double(report.worst_case_clifford) << '\n';
        }
        out = json{{"n", in.record.n},
                   {"axis", "depth"},
                   {"points", std::move(points)},
                   {"coverage_fraction", analysis.layer.coverage()},
                   {"fidelities", analysis.tags}};
        csv = csv_out.str();
    }
    ctx.write_json("bounds.json", out);
    if (ctx.format == "csv") {
        ctx.write_output("bounds.csv", csv);
    }
    ctx.finish();
    return 0;
}

int cmd_compare(RunContext& ctx, const std::string& model_a_path, const std::string& model_b_path,
                int layers) {
    ctx.add_input(model_a_path);
    ctx.add_input(model_b_path);
    const auto actual = mvb::model_from_json(mvb::parse_json_file(model_a_path));
    const auto mitigator = mvb::model_from_json(mvb::parse_json_file(model_b_path));
    const double delta_c = mvb::compare_models(actual, mitigator, layers);
    ctx.write_json("compare.json", json{{"n", actual.n},
                                        {"layers", layers},
                                        {"actual_layer_id", actual.layer_id},
                                        {"mitigator_layer_id", mitigator.layer_id},
                                        {"delta_c", delta_c}});
    ctx.finish();
    return 0;
}

int cmd_pea_bound(RunContext& ctx, const std::string& record_path, const std::string& model_path,
                  const std::string& fit_report_path, const std::vector<double>& mus, int layers) {
    const BoundInputs in = load_bound_inputs(ctx, record_path, model_path, fit_report_path);
    auto fidelities = in.record.fidelities;
    mvb::resolve_degeneracy(fidelities, in.record.degenerate_pairs);

    const auto model_channel = mvb::channel_from_model(in.model);
    mvb::PauliVector f_meas = model_channel.fidelities;  // unmeasured entries: no violation
    for (const auto& [idx, est] : fidelities) {
        f_meas.values[idx] = est.f_meas;
    }
    const auto bound = mvb::pea_bound(f_meas, model_channel.fidelities, mus, layers);
    json etas = json::array();
    for (std::size_t i = 0; i < mus.size(); ++i) {
        etas.push_back({{"mu", mus[i]}, {"eta", bound.eta[i]}});
    }
    json sigma = json::array();
    for (Eigen::Index r = 0; r < bound.sigma.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < bound.sigma.cols(); ++c) {
            row.push_back(bound.sigma(r, c));
        }
        sigma.push_back(std::move(row));
    }
    ctx.write_json("pea_bound.json", json{{"n", in.record.n},
                                          {"layers", layers},
                                          {"eta", std::move(etas)},
                                          {"covariance", std::move(sigma)}});
    ctx.finish();
    return 0;
}

int cmd_tem_bound(RunContext& ctx, const std::string& record_path, const std::string& model_path,
                  const std::string& fit_report_path, const std::string& layers_text) {
    const LayersSpec spec = parse_layers_spec(layers_text);
    if (spec.scaling()) {
        throw mvb::ValidationError("tem-bound takes a single --layers count");
    }
    const BoundInputs in = load_bound_inputs(ctx, record_path, model_path, fit_report_path);
    const RecordAnalysis analysis = analyze_record(in.record, in.model, in.covariance);
    const std::vector<mvb::LayerRatioData> layers(static_cast<std::size_t>(spec.to),
                                                  analysis.layer);
    ctx.write_json("tem_bound.json",
                   json{{"n", in.record.n},
                        {"layers", spec.to},
                        {"gamma", analysis.layer.gamma},
                        {"layer_distance", mvb::layer_distance_two(analysis.layer)},
                        {"tem_bound", mvb::tem_bound(layers)}});
    ctx.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

json summarize_point(const std::vector<double>& delta_o, const mvb::BoundReport& report,
                     double delta_c) {
    return json{{"delta_o", mvb::quartiles_to_json(mvb::quartiles(delta_o))},
                {"delta_gamma", report.delta_gamma},
                {"delta_two", report.delta_two},
                {"delta_min", report.delta_min},
                {"worst_case_clifford", report.worst_case_clifford},
                {"delta_c", delta_c}};
}

int cmd_simulate_perturbation(RunContext& ctx, const json& config) {
    mvb::PerturbationConfig cfg;
    const std::string path = "/config";
    if (config.contains("n")) cfg.n = static_cast<int>(mvb::require_int(config["n"], path + "/n"));
    if (config.contains("depth"))
        cfg.depth = static_cast<int>(mvb::require_int(config["depth"], path + "/depth"));
    if (config.contains("num_circuits"))
        cfg.num_circuits =
            static_cast<int>(mvb::require_int(config["num_circuits"], path + "/num_circuits"));
    if (config.contains("num_channel_sets"))
        cfg.num_channel_sets = static_cast<int>(
            mvb::require_int(config["num_channel_sets"], path + "/num_channel_sets"));
    if (config.contains("rate_range")) {
        const auto& r = mvb::require_array(config["rate_range"], path + "/rate_range");
        if (r.size() != 2) throw mvb::ValidationError(path + "/rate_range: expected [min, max]");
        cfg.rate_min = mvb::require_number(r[0], path + "/rate_range/0");
        cfg.rate_max = mvb::require_number(r[1], path + "/rate_range/1");
    }
    if (config.contains("perturbation_range")) {
        const auto& r =
            mvb::require_array(config["perturbation_range"], path + "/perturbation_range");
        if (r.size() != 2)
            throw mvb::ValidationError(path + "/perturbation_range: expected [min, max]");
        cfg.eps_min = mvb::require_number(r[0], path + "/perturbation_range/0");
        cfg.eps_max = mvb::require_number(r[1], path + "/perturbation_range/1");
    }
    cfg.seed = ctx.seed.value_or(0);

    const auto result = mvb::run_perturbation_experiment(cfg);

    std::ostringstream csv;
    csv << "channel_set,circuit,delta_o,delta_gamma,delta_two,delta_min,wc_clifford,delta_c\n";
    json points = json::array();
    for (std::size_t s = 0; s < result.sets.size(); ++s) {
        const auto& set = result.sets[s];
        for (std::size_t c = 0; c < set.delta_o.size(); ++c) {
            csv << s << ',' << c << ',' << mvb::format_double(set.delta_o[c]) << ','
                << mvb::format_double(set.report.delta_gamma) << ','
                << mvb::format_double(set.report.delta_two) << ','
                << mvb::format_double(set.report.delta_min) << ','
                << mvb::format_double(set.report.worst_case_clifford) << ','
                << mvb::format_double(set.delta_c) << '\n';
        }
        json point = summarize_point(set.delta_o, set.report, set.delta_c);
        point["channel_set"] = s;
        point["actual_even"] = mvb::model_to_json(set.actual_even);
        point["actual_odd"] = mvb::model_to_json(set.actual_odd);
        points.push_back(std::move(point));
    }
    ctx.write_output("perturbation.csv", csv.str());
    ctx.write_json("summary.json",
                   json{{"experiment", "perturbation"},
                        {"config", ctx.config},
                        {"model_even", mvb::model_to_json(result.model_even)},
                        {"model_odd", mvb::model_to_json(result.model_odd)},
                        {"points", std::move(points)}});
    ctx.finish();
    return 0;
}

int cmd_simulate_crosstalk(RunContext& ctx, const json& config) {
    mvb::CrosstalkConfig cfg;
    const std::string path = "/config";
    if (config.contains("n")) cfg.n = static_cast<int>(mvb::require_int(config["n"], path + "/n"));
    if (config.contains("depth"))
        cfg.depth = static_cast<int>(mvb::require_int(config["depth"], path + "/depth"));
    if (config.contains("num_circuits"))
        cfg.num_circuits =
            static_cast<int>(mvb::require_int(config["num_circuits"], path + "/num_circuits"));
    if (config.contains("rate_range")) {
        const auto& r = mvb::require_array(config["rate_range"], path + "/rate_range");
        if (r.size() != 2) throw mvb::ValidationError(path + "/rate_range: expected [min, max]");
        cfg.rate_min = mvb::require_number(r[0], path + "/rate_range/0");
        cfg.rate_max = mvb::require_number(r[1], path + "/rate_range/1");
    }
    if (config.contains("lambda_crosstalk")) {
        cfg.lambda_crosstalk.clear();
        for (const auto& v :
             mvb::require_array(config["lambda_crosstalk"], path + "/lambda_crosstalk")) {
            cfg.lambda_crosstalk.push_back(mvb::require_number(v, path + "/lambda_crosstalk"));
        }
    }
    cfg.seed = ctx.seed.value_or(0);

    const auto result = mvb::run_crosstalk_experiment(cfg);

    std::ostringstream csv;
    csv << "lambda_crosstalk,circuit,delta_o,delta_gamma,delta_two,delta_min,wc_clifford,delta_c\n";
    json points = json::array();
    for (const auto& point : result.points) {
        for (std::size_t c = 0; c < point.delta_o.size(); ++c) {
            csv << mvb::format_double(point.lambda_crosstalk) << ',' << c << ','
                << mvb::format_double(point.delta_o[c]) << ','
                << mvb::format_double(point.report.delta_gamma) << ','
                << mvb::format_double(point.report.delta_two) << ','
                << mvb::format_double(point.report.delta_min) << ','
                << mvb::format_double(point.report.worst_case_clifford) << ','
                << mvb::format_double(point.delta_c) << '\n';
        }
        json p = summarize_point(point.delta_o, point.report, point.delta_c);
        p["lambda_crosstalk"] = point.lambda_crosstalk;
        p["fitted_model"] = mvb::model_to_json(point.fitted);
        points.push_back(std::move(p));
    }
    ctx.write_output("crosstalk.csv", csv.str());
    ctx.write_json("summary.json", json{{"experiment", "crosstalk"},
                                        {"config", ctx.config},
                                        {"in_model_actual",
                                         mvb::model_to_json(result.in_model_actual)},
                                        {"points", std::move(points)}});
    ctx.finish();
    return 0;
}

int cmd_simulate_t1_drift(RunContext& ctx, const json& config) {
    mvb::T1DriftConfig cfg;
    const std::string path = "/config";
    if (config.contains("t1_us")) {
        cfg.t1.clear();
        for (const auto& v : mvb::require_array(config["t1_us"], path + "/t1_us")) {
            cfg.t1.push_back(mvb::require_number(v, path + "/t1_us") * 1e-6);
        }
    }
    if (config.contains("gate_time_ns"))
        cfg.gate_time = mvb::require_number(config["gate_time_ns"], path + "/gate_time_ns") * 1e-9;
    if (config.contains("depth"))
        cfg.depth = static_cast<int>(mvb::require_int(config["depth"], path + "/depth"));
    if (config.contains("num_circuits"))
        cfg.num_circuits =
            static_cast<int>(mvb::require_int(config["num_circuits"], path + "/num_circuits"));
    if (config.contains("drift")) {
        cfg.drift.clear();
        for (const auto& v : mvb::require_array(config["drift"], path + "/drift")) {
            cfg.drift.push_back(mvb::require_number(v, path + "/drift"));
        }
    }
    cfg.seed = ctx.seed.value_or(0);

    const auto result = mvb::run_t1_drift_experiment(cfg);

    std::ostringstream csv;
    csv << "drift,circuit,observable,delta_o,delta_gamma,delta_two,delta_min,wc_clifford,delta_c\n";
    json points = json::array();
    for (const auto& point : result.points) {
        std::vector<double> flat;
        for (std::size_t c = 0; c < point.delta_o.size(); ++c) {
            for (std::size_t o = 0; o < point.delta_o[c].size(); ++o) {
                flat.push_back(point.delta_o[c][o]);
                csv << mvb::format_double(point.drift) << ',' << c << ','
                    << result.observables[o].str() << ','
                    << mvb::format_double(point.delta_o[c][o]) << ','
                    << mvb::format_double(point.report.delta_gamma) << ','
                    << mvb::format_double(point.report.delta_two) << ','
                    << mvb::format_double(point.report.delta_min) << ','
                    << mvb::format_double(point.report.worst_case_clifford) << ','
                    << mvb::format_double(point.delta_c) << '\n';
            }
        }
        json p = summarize_point(flat, point.report, point.delta_c);
        p["drift"] = point.drift;
        const double wc = point.report.worst_case_clifford;
        p["wc_equals_delta_c"] =
            std::abs(wc - point.delta_c) <= 1e-9 * std::max(std::abs(point.delta_c), 1e-300);
        points.push_back(std::move(p));
    }
    ctx.write_output("t1_drift.csv", csv.str());
    ctx.write_json("summary.json", json{{"experiment", "t1_drift"},
                                        {"config", ctx.config},
                                        {"points", std::move(points)}});
    ctx.finish();
    return 0;
}

int cmd_simulate_counterexample(RunContext& ctx, const json& config) {
    mvb::CounterexampleConfig cfg;
    const std::string path = "/config";
    if (config.contains("depth"))
        cfg.depth = static_cast<int>(mvb::require_int(config["depth"], path + "/depth"));
    if (config.contains("r_o")) cfg.r_o = mvb::require_number(config["r_o"], path + "/r_o");
    if (config.contains("r_po")) cfg.r_po = mvb::require_number(config["r_po"], path + "/r_po");
    if (config.contains("dtheta")) {
        const auto& d = mvb::require_object(config["dtheta"], path + "/dtheta");
        if (d.contains("min")) cfg.dtheta_min = mvb::require_number(d["min"], path + "/dtheta/min");
        if (d.contains("max")) cfg.dtheta_max = mvb::require_number(d["max"], path + "/dtheta/max");
        if (d.contains("points"))
            cfg.dtheta_points =
                static_cast<int>(mvb::require_int(d["points"], path + "/dtheta/points"));
    }

    const auto result = mvb::cpt_counterexample_scan(cfg);

    std::ostringstream csv;
    csv << "eigenvector,eigenvalue,dtheta,delta_o\n";
    json maxima = json::array();
    for (std::size_t v = 0; v < result.traces.size(); ++v) {
        double peak = 0.0;
        for (std::size_t t = 0; t < result.dtheta.size(); ++t) {
            peak = std::max(peak, result.traces[v][t]);
            csv << v << ',' << mvb::format_double(result.eigenvalues[v]) << ','
                << mvb::format_double(result.dtheta[t]) << ','
                << mvb::format_double(result.traces[v][t]) << '\n';
        }
        maxima.push_back({{"eigenvector", v},
                          {"eigenvalue", result.eigenvalues[v]},
                          {"max_delta_o", peak},
                          {"exceeds_clifford", peak > result.worst_case_clifford}});
    }
    ctx.write_output("counterexample.csv", csv.str());
    ctx.write_json("summary.json",
                   json{{"experiment", "counterexample"},
                        {"config", ctx.config},
                        {"worst_case_clifford", result.worst_case_clifford},
                        {"positive_eigenvalues", result.positive_eigenvalues},
                        {"eigenvalues", result.eigenvalues},
                        {"eigenvector_maxima", std::move(maxima)}});
    ctx.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// extrapolate

int cmd_extrapolate(RunContext& ctx, const std::vector<std::string>& report_paths,
                    const std::string& axis, const std::vector<double>& predict_at) {
    if (report_paths.size() < 2) {
        throw mvb::ValidationError("extrapolation needs at least two reports");
    }
    std::vector<double> xs;
    std::map<std::string, std::vector<double>> series;
    for (const auto& path : report_paths) {
        ctx.add_input(path);
        const json report = mvb::parse_json_file(path);
        double x = 0.0;
        if (axis == "depth") {
            x = static_cast<double>(
                mvb::require_int(mvb::require_field(report, "depth", "/"), "/depth"));
        } else if (axis == "width") {
            x = static_cast<double>(mvb::require_int(mvb::require_field(report, "n", "/"), "/n"));
        } else {
            throw mvb::ValidationError("--axis must be depth or width");
        }
        xs.push_back(x);
        const json& totals = mvb::require_object(mvb::require_field(report, "totals", "/"),
                                                 "/totals");
        for (const char* key : {"delta_min", "delta_gamma", "delta_two", "worst_case_clifford"}) {
            series[key].push_back(
                mvb::require_number(mvb::require_field(totals, key, "/totals"), "/totals"));
        }
    }
    {
        std::set<double> unique(xs.begin(), xs.end());
        if (unique.size() < 2) {
            throw mvb::ValidationError("the reports do not vary along the chosen axis");
        }
    }
    json metrics = json::object();
    for (const auto& [key, ys] : series) {
        const mvb::LineFit fit = mvb::gls_line_fit(xs, ys, Eigen::MatrixXd());
        json predictions = json::array();
        for (double at : predict_at) {
            predictions.push_back({{"at", at}, {"value", fit.intercept + fit.slope * at}});
        }
        metrics[key] = {{"intercept", fit.intercept},
                        {"slope", fit.slope},
                        {"predictions", std::move(predictions)}};
    }
    ctx.write_json("extrapolation.json",
                   json{{"axis", axis}, {"points", xs}, {"metrics", std::move(metrics)}});
    ctx.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-violation bounds for error-mitigated circuits"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string format = "json";
    app.add_option("--out-dir", out_dir, "Directory for outputs and the run manifest");
    app.add_option("--seed", seed, "RNG seed for randomized commands")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--workers", workers, "OpenMP worker count (0 = library default)");
    app.add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a sparse generator model to measured fidelities");
    std::string fit_record, fit_raw, fit_weighting = "uniform";
    int fit_bootstrap = 0;
    fit->add_option("record", fit_record, "Learning record JSON")->required();
    fit->add_option("--raw", fit_raw, "Raw per-randomization counts JSON");
    fit->add_option("--bootstrap", fit_bootstrap, "Bootstrap replica count");
    fit->add_option("--weighting", fit_weighting, "Least-squares weighting")
        ->check(CLI::IsMember({"uniform", "variance"}));

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Systematic-error bounds from a record and model");
    std::string bounds_record, bounds_model, bounds_fit_report, bounds_layers = "1";
    bounds->add_option("record", bounds_record, "Learning record JSON")->required();
    bounds->add_option("model", bounds_model, "Model JSON")->required();
    bounds->add_option("--fit-report", bounds_fit_report, "Fit report with a rate covariance");
    bounds->add_option("--layers", bounds_layers, "Layer count N, or A..B for a depth scan");

    // compare
    auto* compare = app.add_subcommand("compare", "Bound one model mitigating another");
    std::string compare_a, compare_b;
    int compare_layers = 1;
    compare->add_option("actual", compare_a, "Actual-channel model JSON")->required();
    compare->add_option("mitigator", compare_b, "Mitigating model JSON")->required();
    compare->add_option("--layers", compare_layers, "Repetitions of the layer");

    // pea-bound
    auto* pea = app.add_subcommand("pea-bound", "Amplification-error bound per stretch factor");
    std::string pea_record, pea_model, pea_fit_report;
    std::vector<double> pea_mus{0.0, 0.5, 1.0, 1.5, 2.0};
    int pea_layers = 1;
    pea->add_option("record", pea_record, "Learning record JSON")->required();
    pea->add_option("model", pea_model, "Model JSON")->required();
    pea->add_option("--fit-report", pea_fit_report, "Fit report with a rate covariance");
    pea->add_option("--mu", pea_mus, "Amplification factors")->delimiter(',');
    pea->add_option("--layers", pea_layers, "Layer count");

    // tem-bound
    auto* tem = app.add_subcommand("tem-bound", "Tensor-network mitigation bound");
    std::string tem_record, tem_model, tem_fit_report, tem_layers = "1";
    tem->add_option("record", tem_record, "Learning record JSON")->required();
    tem->add_option("model", tem_model, "Model JSON")->required();
    tem->add_option("--fit-report", tem_fit_report, "Fit report with a rate covariance");
    tem->add_option("--layers", tem_layers, "Layer count");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a synthetic mitigation experiment");
    simulate->require_subcommand(1);
    std::string sim_config;
    std::vector<CLI::App*> sim_kinds;
    for (const char* kind : {"perturbation", "crosstalk", "t1-drift", "counterexample"}) {
        auto* sub = simulate->add_subcommand(kind);
        sub->add_option("--config", sim_config, "Experiment config JSON");
        sim_kinds.push_back(sub);
    }

    // extrapolate
    auto* extrapolate = app.add_subcommand("extrapolate", "Linear scaling fit over bound reports");
    std::vector<std::string> extrapolate_reports;
    std::string extrapolate_axis = "depth";
    std::vector<double> extrapolate_predict;
    extrapolate->add_option("reports", extrapolate_reports, "Bound report JSONs")->required();
    extrapolate->add_option("--axis", extrapolate_axis, "Scaling axis")
        ->check(CLI::IsMember({"depth", "width"}));
    extrapolate->add_option("--predict", extrapolate_predict, "Axis values to extrapolate to")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (workers > 0) {
        omp_set_num_threads(workers);
    }

    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.workers = workers;
    ctx.format = format;
    if (seed_set) {
        ctx.seed = seed;
    }

    try {
        if (fit->parsed()) {
            ctx.command = "fit";
            ctx.config = {{"record", fit_record},
                          {"raw", fit_raw},
                          {"bootstrap", fit_bootstrap},
                          {"weighting", fit_weighting}};
            return cmd_fit(ctx, fit_record, fit_raw, fit_bootstrap, fit_weighting);
        }
        if (bounds->parsed()) {
            ctx.command = "bounds";
            ctx.config = {{"record", bounds_record},
                          {"model", bounds_model},
                          {"fit_report", bounds_fit_report},
                          {"layers", bounds_layers},
                          {"format", format}};
            return cmd_bounds(ctx, bounds_record, bounds_model, bounds_fit_report, bounds_layers);
        }
        if (compare->parsed()) {
            ctx.command = "compare";
            ctx.config = {{"actual", compare_a},
                          {"mitigator", compare_b},
                          {"layers", compare_layers}};
            return cmd_compare(ctx, compare_a, compare_b, compare_layers);
        }
        if (pea->parsed()) {
            ctx.command = "pea-bound";
            ctx.config = {{"record", pea_record},
                          {"model", pea_model},
                          {"fit_report", pea_fit_report},
                          {"mu", pea_mus},
                          {"layers", pea_layers}};
            return cmd_pea_bound(ctx, pea_record, pea_model, pea_fit_report, pea_mus, pea_layers);
        }
        if (tem->parsed()) {
            ctx.command = "tem-bound";
            ctx.config = {{"record", tem_record},
                          {"model", tem_model},
                          {"fit_report", tem_fit_report},
                          {"layers", tem_layers}};
            return cmd_tem_bound(ctx, tem_record, tem_model, tem_fit_report, tem_layers);
        }
        if (simulate->parsed()) {
            json config = json::object();
            if (!sim_config.empty()) {
                ctx.add_input(sim_config);
                config = mvb::parse_json_file(sim_config);
            }
            if (!seed_set && config.contains("seed")) {
                ctx.seed = static_cast<std::uint64_t>(
                    mvb::require_int(config["seed"], "/config/seed"));
            }
            ctx.config = config;
            const std::array<int (*)(RunContext&, const json&), 4> handlers = {
                cmd_simulate_perturbation, cmd_simulate_crosstalk, cmd_simulate_t1_drift,
                cmd_simulate_counterexample};
            for (std::size_t k = 0; k < sim_kinds.size(); ++k) {
                if (sim_kinds[k]->parsed()) {
                    ctx.command = std::string("simulate ") + sim_kinds[k]->get_name();
                    return handlers[k](ctx, config);
                }
            }
        }
        if (extrapolate->parsed()) {
            ctx.command = "extrapolate";
            ctx.config = {{"reports", extrapolate_reports},
                          {"axis", extrapolate_axis},
                          {"predict", extrapolate_predict}};
            return cmd_extrapolate(ctx, extrapolate_reports, extrapolate_axis, extrapolate_predict);
        }
    } catch (const mvb::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const mvb::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
