#pragma once

#include <string>

#include "thermaval/thermal.hpp"

namespace thermaval::io {

// JSON building document; infinite shade dimensions written as the string
// "inf". load(save(m)) restores m exactly.
thermal::BuildingModel load_building(const std::string& path);
void save_building(const thermal::BuildingModel& model, const std::string& path);

thermal::BuildingModel parse_building(const std::string& text);
std::string serialize_building(const thermal::BuildingModel& model);

// Standalone shade document: window width/height/azimuth_deg plus the shade
// elements, same field set as a window's "shade" block.
geometry::ShadeAssembly load_shade(const std::string& path);
geometry::ShadeAssembly parse_shade(const std::string& text);

}  // namespace thermaval::io
