#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "shapefit/core.hpp"

namespace shapefit {

/// Contents of a shapefit-v1 text file.
///
///   shapefit-v1 <n> <d> <edge_count>
///   # key=value                      (optional metadata comments)
///   i x_1 ... x_d                    (n lines, optional section)
///   i j v_1 ... v_d [g|b]            (edge_count lines)
///
/// Indices are zero-based. Floats are written with 17 significant digits so
/// every value round-trips exactly. Blank lines and lines starting with '#'
/// are ignored by the reader; `key=value` comments are collected into
/// `metadata`.
struct Instance {
  std::optional<LocationSet> locations;
  ObservationSet observations;
  std::map<std::string, std::string> metadata;
};

/// Formats a double with 17 significant digits.
std::string format_real(double x);

void write_instance(std::ostream& os, const Instance& instance);
std::string to_text(const Instance& instance);

/// Writes a location-only block (edge_count 0).
void write_locations(std::ostream& os, const LocationSet& locations);

/// Throws InvalidInputError on malformed content; the message names the line
/// (and the edge, for direction validation failures).
Instance read_instance(std::istream& is);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& instance);

}  // namespace shapefit
