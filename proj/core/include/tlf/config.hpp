#pragma once

#include <filesystem>
#include <iosfwd>

#include "tlf/transfer.hpp"

namespace tlf {

// INI-style configuration:
//
//   [forest]  trees, min_leaf_size_small, min_leaf_size_large, large_threshold
//   [pivot]   threshold
//   [adapt]   ridge, mmd, manifold, kernel, alpha_mode, mmd_cross_term
//   [run]     seed
//
// Keys that are absent keep their current value in `base`.
TlfConfig parse_tlf_config(std::istream& in, TlfConfig base = {});
TlfConfig load_tlf_config(const std::filesystem::path& path, TlfConfig base = {});

// Writes a fully commented config holding `cfg`.
void write_tlf_config(std::ostream& out, const TlfConfig& cfg = {});

}  // namespace tlf
