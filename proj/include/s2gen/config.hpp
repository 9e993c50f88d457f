#pragma once

#include <functional>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "s2gen/pipeline.hpp"

namespace s2gen {

/// One user-settable GenConfig field. The same table drives the config-file
/// reader, the CLI flags (and their S2_* environment variables) and --help.
struct ConfigField {
    std::string section;
    std::string key;
    std::string flag;
    std::string help;
    std::function<std::string(const GenConfig&)> get;
    /// Throws std::invalid_argument on malformed text.
    std::function<void(GenConfig&, std::string_view)> set;
};

const std::vector<ConfigField>& config_fields();

/// "A..B" (half-open) or a single seed "A".
SeedRange parse_seed_range(std::string_view text);
std::string format_seed_range(const SeedRange& range);

/// Sectioned key = value text:
///
///   [expr]
///   b_max = 5
///   [dataset]
///   seeds = "0..10"
///
/// Unknown sections or keys are errors. Values override `base`.
GenConfig parse_config_text(std::string_view text, GenConfig base = {});
GenConfig load_config_file(const std::string& path, GenConfig base = {});
std::string format_config_text(const GenConfig& cfg);

nlohmann::json config_to_json(const GenConfig& cfg);
GenConfig config_from_json(const nlohmann::json& j);

}  // namespace s2gen
