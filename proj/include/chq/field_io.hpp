#pragma once

#include <filesystem>
#include <iosfwd>

#include "chq/grid.hpp"

namespace chq {

/// Binary field file "CHQF", all integers and reals little-endian:
///   "CHQF" | u32 version = 1 | u32 N | u32 M | f64 L | M^N f64 samples
/// Samples are row-major, last axis fastest.
void write_chqf(std::ostream& os, const Field& f);
void write_chqf(const std::filesystem::path& path, const Field& f);
Field read_chqf(std::istream& is);
Field read_chqf(const std::filesystem::path& path);

}  // namespace chq
