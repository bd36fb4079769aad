#pragma once

#include <string>

#include <json.hpp>

#include "mvb/bounds.hpp"
#include "mvb/channel.hpp"
#include "mvb/experiments.hpp"
#include "mvb/learning.hpp"

namespace mvb {

using json = nlohmann::ordered_json;

// All emitted floats use 17 significant digits so rerunning a command
// reproduces its outputs byte for byte.
std::string format_double(double v);

// Typed accessors that report schema violations with a JSON-pointer path.
const json& require_field(const json& j, const std::string& key, const std::string& path);
double require_number(const json& j, const std::string& path);
std::int64_t require_int(const json& j, const std::string& path);
std::string require_string(const json& j, const std::string& path);
const json& require_array(const json& j, const std::string& path);
const json& require_object(const json& j, const std::string& path);

json parse_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

json model_to_json(const PauliLindbladModel& m);
PauliLindbladModel model_from_json(const json& j, const std::string& path = "");

// Channel JSON stores a sparse {pauli: fidelity} map; omitted Paulis mean 1.
json channel_to_json(const PauliStochastishChannel& c);
PauliStochastishChannel channel_from_json(const json& j, const std::string& path = "");

json learning_record_to_json(const LearningRecord& record);
LearningRecord learning_record_from_json(const json& j, const std::string& path = "");

json raw_learning_data_to_json(const RawLearningData& raw);
RawLearningData raw_learning_data_from_json(const json& j, const std::string& path = "");

json fit_result_to_json(const ModelFitResult& fit, const PauliLindbladModel& model_for_terms);
Eigen::MatrixXd covariance_from_json(const json& j, std::size_t terms, const std::string& path);

json bound_report_to_json(const BoundReport& report);
std::string bound_report_to_csv(const BoundReport& report);

json quartiles_to_json(const Quartiles& q);

}  // namespace mvb
