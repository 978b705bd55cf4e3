#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cpdgrid/circuit_model.hpp"

namespace cpdgrid {

/// Parse a network document:
///
///   { "nodes": ["1", "2"],
///     "branches": [{"a": "1", "b": "2", "g_siemens": 1.0}],
///     "injections": {"1": 1.0, "2": -0.8},
///     "interior": [] }
///
/// Unknown fields are rejected. `injections` and `interior` are optional.
/// Syntax errors carry line/column; validation errors carry the JSON path.
Network parse_network(std::string_view text);

Network load_network(const std::filesystem::path& path);

/// Canonical serialization (two-space indent, trailing newline). Parsing
/// the result yields an equal network.
std::string network_to_json(const Network& network);

}  // namespace cpdgrid
