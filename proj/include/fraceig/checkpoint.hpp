#pragma once

#include <filesystem>
#include <iosfwd>

#include "fraceig/network.hpp"

namespace fraceig {

/// FSEV1 layout: "FSEV1\n", "d l m featcount\n", one "type p" line per
/// feature, the parameters as little-endian doubles, then a footer line
/// "lambda_hat lambda_se l2_norm_sq".
void write_checkpoint(std::ostream& out, const ModeSnapshot& snapshot);
void save_checkpoint(const std::filesystem::path& path, const ModeSnapshot& snapshot);

/// Throws FormatError naming the failing section (magic, header, features, parameters, footer).
ModeSnapshot read_checkpoint(std::istream& in);
ModeSnapshot load_checkpoint(const std::filesystem::path& path);

}  // namespace fraceig
