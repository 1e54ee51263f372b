#pragma once

// Scenario files: JSON with sections machine{}, processors[], environment{}.

#include "ctm/machine.hpp"

#include <filesystem>
#include <string>

namespace ctm {

struct Scenario {
    MachineConfig config;
    EnvironmentScript env;
};

/// Throws ScenarioError with a line number for syntax errors and a field
/// path (e.g. "processors[2].kind") for validation errors.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text);

} // namespace ctm
