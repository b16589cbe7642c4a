#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

namespace gridsplit::detail {

using Json = nlohmann::ordered_json;

// Canonical text form of every exported document.
inline std::string dump(const Json& document) { return document.dump(2) + "\n"; }

// JSON has no infinity; non-finite values export as null.
inline Json number_or_null(double value) {
    return std::isfinite(value) ? Json(value) : Json(nullptr);
}

}  // namespace gridsplit::detail
