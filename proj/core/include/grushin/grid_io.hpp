#pragma once

#include <filesystem>
#include <iosfwd>

#include "grushin/grid.hpp"

namespace grushin {

/// CSV with header "x,y,value", one row per node in storage order; floats
/// carry 17 significant digits.
void write_csv(const GridFunction& u, std::ostream& os);
void write_csv(const GridFunction& u, const std::filesystem::path& path);
/// Reads the CSV layout above; the grid is reconstructed from the distinct
/// x and y values.
GridFunction read_csv(std::istream& is);
GridFunction read_csv(const std::filesystem::path& path);

/// Binary layout, all little-endian:
///   float64 x0, x1, y0, y1; uint64 nx, ny; float64 values[nx * ny]
/// with values in x-major order (index i * ny + j).
void write_binary(const GridFunction& u, std::ostream& os);
void write_binary(const GridFunction& u, const std::filesystem::path& path);
GridFunction read_binary(std::istream& is);
GridFunction read_binary(const std::filesystem::path& path);

}  // namespace grushin
