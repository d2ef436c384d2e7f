#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Files under data/ compiled into the library (generated at configure time).
namespace flexgrid::bundled {

std::optional<std::string_view> topology_source(std::string_view name);
std::vector<std::string> topology_names();

std::optional<std::string_view> preset_source(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace flexgrid::bundled
