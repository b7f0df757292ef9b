#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "incscat/grid.hpp"
#include "incscat/random.hpp"

namespace incscat {

// Gray-level image, row 0 at the top, intensities in [0, 1].
struct RasterShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> gray;

  double at(std::size_t col, std::size_t row) const { return gray[row * width + col]; }
  void validate() const;
};

// Portable graymap, plain (P2) or raw (P5), 8 or 16 bit.
RasterShape read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const RasterShape& shape);

// Magnitude heatmap of a grid array; the largest value maps to white.
void write_heatmap_pgm(const std::filesystem::path& path, const Grid2D& grid, const CVector& values);

// Digit-like stroke figure on a size x size canvas: one of ten seven-segment
// glyphs with random slant, stroke width and offset.
RasterShape procedural_digit(Rng& rng, std::size_t size = 28);

// Quadrants in reading order: 0 top-left, 1 top-right, 2 bottom-left,
// 3 bottom-right ("top" is +y).
struct Quadrant {
  std::size_t i0, j0, width, height;  // cell range [i0, i0 + width) x [j0, j0 + height)
};
Quadrant grid_quadrant(const Grid2D& grid, int index);

// Nearest-neighbour fit of the raster into the quadrant, aspect preserved and
// centred; a cell is occupied when its source pixel is >= threshold.
Mask rasterize_shape(const RasterShape& shape, const Grid2D& grid, const Quadrant& quadrant,
                     double threshold = 0.5);

}  // namespace incscat
