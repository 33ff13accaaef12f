#pragma once

#include "pinauthor/core/errors.hpp"

#include <json.hpp>

#include <string_view>

namespace pinauthor::llm {

// First JSON object found in model output. Code fences and surrounding
// prose are skipped; raw control characters inside strings and
// triple-quoted strings are tolerated. Throws SchemaError.
nlohmann::json extractJsonObject(std::string_view raw);

} // namespace pinauthor::llm
