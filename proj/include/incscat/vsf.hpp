#pragma once

// Flat binary container for complex arrays.
//
// Layout (little-endian): "VSF1", u32 rank, u32 dims[2], then
// dims[0] * dims[1] pairs of f64 (re, im) in row-major order.
// Rank-1 arrays store dims = {n, 1}; grid arrays store dims = {ny, nx}.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incscat/grid.hpp"

namespace incscat {

inline constexpr std::size_t kVsfHeaderBytes = 16;

struct VsfArray {
  std::uint32_t rank = 1;
  std::array<std::uint32_t, 2> dims{0, 1};
  CVector values;

  std::size_t element_count() const { return std::size_t{dims[0]} * dims[1]; }
  std::size_t byte_size() const { return kVsfHeaderBytes + 16 * element_count(); }

  static VsfArray vector(const CVector& v);
  static VsfArray on_grid(const Grid2D& grid, const CVector& v);
  static VsfArray mask(const Grid2D& grid, const Mask& m);
  static VsfArray matrix(const CMatrix& a);
};

std::vector<unsigned char> encode_vsf(const VsfArray& a);
VsfArray decode_vsf(const std::vector<unsigned char>& bytes, const std::string& what = "vsf");

void write_vsf(const std::filesystem::path& path, const VsfArray& a);
VsfArray read_vsf(const std::filesystem::path& path);
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);

// Shape checks used by readers of grid-shaped and receiver-shaped data.
CVector expect_grid(const VsfArray& a, const Grid2D& grid, const std::string& what);
CVector expect_vector(const VsfArray& a, std::size_t n, const std::string& what);
Mask expect_mask(const VsfArray& a, const Grid2D& grid, const std::string& what);
CMatrix to_matrix(const VsfArray& a);

}  // namespace incscat
