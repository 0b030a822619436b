#pragma once

#include <string>

#include <json.hpp>

#include "kkf/harness.hpp"

namespace kkf {

using Json = nlohmann::json;

KernelSpec parse_kernel_spec(const Json& j, const std::string& path);
Json to_json(const KernelSpec& spec);

TransitionSpec parse_transition(const Json& j, const std::string& path);

/// Relative dataset paths are resolved against `base_dir`. Errors are
/// ConfigInvalid naming the offending field path.
ExperimentConfig parse_experiment_config(const Json& j, const std::string& base_dir = "");

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace kkf
