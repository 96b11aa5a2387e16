#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fieldelim/grid.hpp"

namespace fieldelim {

/// `.fld` file: one JSON header line
/// {"dims":[n1,n2,n3],"spacings":[h1,h2,h3],"label":...,"components":c}
/// then c * n1 n2 n3 little-endian (re, im) double pairs, x fastest,
/// component by component.
struct Snapshot {
  std::string label;
  std::vector<GridField> components;
};

void write_snapshot(const std::filesystem::path& path,
                    std::span<const GridField> components,
                    const std::string& label);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace fieldelim
