#pragma once

#include <json.hpp>  // vendored nlohmann/json

namespace winelab {

// Insertion-ordered so configs, grids and reports keep their declared key order.
using Json = nlohmann::ordered_json;

}  // namespace winelab
