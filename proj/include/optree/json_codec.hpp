#pragma once

#include <json.hpp>

#include "optree/value.hpp"

namespace optree {

using json = nlohmann::json;

/// Calendar kinds serialize as their ISO strings and come back through
/// infer_from_text, so a value survives a round trip as long as its text
/// form is unambiguous.
json value_to_json(const Value& v);
/// Throws Error("BadValue") for objects and nested arrays.
Value value_from_json(const json& j);

}  // namespace optree
