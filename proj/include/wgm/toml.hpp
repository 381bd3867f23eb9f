#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace wgm {

/// Reads the TOML subset used by the run and material files into a JSON
/// document: tables, arrays of tables, dotted keys, strings, integers,
/// floats, booleans, (multi-line) arrays and inline tables. Dates are not
/// supported. Throws ValidationError with a line number on malformed input.
nlohmann::json parse_toml(std::string_view text);

nlohmann::json parse_toml_file(const std::string& path);

}  // namespace wgm
