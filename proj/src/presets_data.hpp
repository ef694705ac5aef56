#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kerrpdc::detail {

/// (name, text) of every presets/*.cfg file, sorted by name. Generated at configure time.
const std::vector<std::pair<std::string, std::string>>& embedded_presets();

}  // namespace kerrpdc::detail
