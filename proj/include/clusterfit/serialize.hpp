#ifndef CLUSTERFIT_SERIALIZE_HPP
#define CLUSTERFIT_SERIALIZE_HPP

#include <string>

#include "json.hpp"

#include "clusterfit/datagen.hpp"
#include "clusterfit/estimator.hpp"
#include "clusterfit/funclass.hpp"
#include "clusterfit/targets.hpp"

namespace clusterfit::serialize {

using json = nlohmann::json;

/// Throws "config error: missing key 'k' in <where>" so malformed configs
/// name the offending key.
const json& require(const json& j, const std::string& key, const std::string& where);

funclass::CompositionTree tree_from_json(const json& j);
json tree_to_json(const funclass::CompositionTree& tree);

/// Builds a target from {"regime": ..., parameters, "amplitude", "seed"};
/// regenerating from the emitted json reproduces the target bit for bit.
targets::TargetFunction target_from_json(const json& j);
json target_to_json(const targets::TargetFunction& target, const json& original_config);

datagen::ProcessSpec process_from_json(const json& j);
json process_to_json(const datagen::ProcessSpec& spec);
datagen::NoiseSpec noise_from_json(const json& j);
json noise_to_json(const datagen::NoiseSpec& spec);
datagen::DesignSpec design_from_json(const json& j);
json design_to_json(const datagen::DesignSpec& spec);

/// Dataset table "subject,obs,x1..xd,y" with full-precision reals.
std::string dataset_to_csv(const datagen::Dataset& data);
datagen::Dataset dataset_from_csv(const std::string& text);

std::string report_to_csv(const estimator::FitReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace clusterfit::serialize

#endif
