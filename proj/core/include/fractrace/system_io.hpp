#pragma once

#include <string>
#include <string_view>

#include "fractrace/system.hpp"

namespace fractrace {

// Parses a system definition in TOML:
//
//   name = "tent"
//   dim = 1
//   region = [[0.0], [1.0]]            # interval ends (1D) or triangle (2D)
//   base_point = [0.0]
//   generic_point = [0.3333333333]     # optional
//   diam = 1.0                         # optional
//   branch_set = [[0.25, 0.433]]       # optional, declared (2D)
//
//   [[map]]
//   linear = [0.5]                     # [a] in 1D, [a11, a12, a21, a22] in 2D
//   offset = [0.0]
//
//   [[cell]]
//   branch = 1                         # one-based
//   interval = [0.0, 0.5]              # 1D
//   # triangle = [[x, y], [x, y], [x, y]]   (2D)
SystemDefinition ParseSystemToml(std::string_view text);

// Serializes a definition in the format read by ParseSystemToml.
std::string SystemToToml(const SystemDefinition& def);

// Built-in name or path to a TOML file.
SystemPtr LoadSystem(const std::string& name_or_path);

}  // namespace fractrace
