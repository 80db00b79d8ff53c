#pragma once

#include <string_view>
#include <vector>

namespace geosynth {

/// Built-in text assets compiled from core/assets (e.g. "templates.json",
/// "prompts/reverse_search.txt"). Throws std::out_of_range for unknown names.
std::string_view asset(std::string_view name);
std::vector<std::string_view> asset_names();

} // namespace geosynth
