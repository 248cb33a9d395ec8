#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exiffi/forest.hpp"

namespace exiffi {

// Versioned binary model container, little endian throughout:
//
//   magic "XIFM" | u32 format version | params and fitted state |
//   per-tree node arrays (topology, counts, normal, intercept) |
//   u32 CRC-32 of all preceding bytes
//
// Serialization is bit exact: a loaded forest reproduces every anomaly
// score of the original bit for bit.  Node thresholds and the c(n) table
// are derived values and are recomputed on load.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Forest& f);
Forest deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const Forest& f, const std::string& path);
Forest load_model(const std::string& path);

}  // namespace exiffi
