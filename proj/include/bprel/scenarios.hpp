#pragma once

// Built-in scenarios and the YAML scenario file format.

#include "bprel/simulator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bprel {

/// user1 (ipn:31) -> lgw (ipn:220) -> rover1 (ipn:21); 50 ADUs with
/// delivery reporting, the transmission carrying sequence number 17 lost
/// between lgw and rover1.
Scenario lunar_scenario();
/// Same topology with random loss on lgw-rover1 instead of the scripted
/// drop.
Scenario lunar_random_scenario(double loss_rate = 0.01);

/// PCC (ipn:10) -> GS2 (ipn:20) -> EOSAT (ipn:50); 5 custody ADUs with
/// GS2 scripted to accept 0 and 1, drop 2 and 4 once, and forward the rest.
Scenario eo_scenario();
/// 200 custody ADUs over links losing 10% of transmissions, GS2 drawing
/// accept/drop/forward with probabilities 0.5/0.25/0.25, for 600 s.
Scenario eo_random_scenario();

/// Names accepted by builtin_scenario().
std::vector<std::string> builtin_names();
std::optional<Scenario> builtin_scenario(std::string_view name);

/// Parses a YAML scenario. Throws ConfigError on unknown keys, missing
/// fields or bad values.
Scenario parse_scenario(std::string_view text);
/// Throws ConfigError, including when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

} // namespace bprel
