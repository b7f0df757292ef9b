#include "incscat/vsf.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "incscat/error.hpp"

namespace incscat {

static_assert(std::endian::native == std::endian::little, "vsf I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'S', 'F', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  unsigned char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint32_t checked_dim(std::size_t n) {
  if (n > 0xffffffffu) throw InvalidArgument("vsf: dimension exceeds u32");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

VsfArray VsfArray::vector(const CVector& v) {
  return {1, {checked_dim(static_cast<std::size_t>(v.size())), 1}, v};
}

VsfArray VsfArray::on_grid(const Grid2D& grid, const CVector& v) {
  if (static_cast<std::size_t>(v.size()) != grid.size()) throw InvalidArgument("vsf: vector does not match grid");
  return {2, {checked_dim(grid.ny()), checked_dim(grid.nx())}, v};
}

VsfArray VsfArray::mask(const Grid2D& grid, const Mask& m) {
  if (m.size() != grid.size()) throw InvalidArgument("vsf: mask does not match grid");
  CVector v(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = m[i] ? 1.0 : 0.0;
  return on_grid(grid, v);
}

VsfArray VsfArray::matrix(const CMatrix& a) {
  VsfArray out{2, {checked_dim(static_cast<std::size_t>(a.rows())), checked_dim(static_cast<std::size_t>(a.cols()))},
               CVector(a.size())};
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.values[r * a.cols() + c] = a(r, c);
  return out;
}

std::vector<unsigned char> encode_vsf(const VsfArray& a) {
  if (a.rank != 1 && a.rank != 2) throw InvalidArgument("vsf: rank must be 1 or 2");
  if (a.rank == 1 && a.dims[1] != 1) throw InvalidArgument("vsf: rank-1 arrays store dims {n, 1}");
  if (static_cast<std::size_t>(a.values.size()) != a.element_count())
    throw InvalidArgument("vsf: value count does not match dims");
  std::vector<unsigned char> out;
  out.reserve(a.byte_size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, a.rank);
  put_u32(out, a.dims[0]);
  put_u32(out, a.dims[1]);
  const std::size_t off = out.size();
  out.resize(a.byte_size());
  // std::complex<double> is layout-compatible with double[2].
  std::memcpy(out.data() + off, a.values.data(), 16 * a.element_count());
  return out;
}

VsfArray decode_vsf(const std::vector<unsigned char>& bytes, const std::string& what) {
  if (bytes.size() < kVsfHeaderBytes) throw FormatError(what + ": truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(what + ": bad magic");
  VsfArray a;
  a.rank = get_u32(bytes.data() + 4);
  a.dims = {get_u32(bytes.data() + 8), get_u32(bytes.data() + 12)};
  if (a.rank != 1 && a.rank != 2) throw FormatError(what + ": unsupported rank " + std::to_string(a.rank));
  if (a.rank == 1 && a.dims[1] != 1) throw FormatError(what + ": rank-1 array with dims[1] != 1");
  if (bytes.size() != a.byte_size())
    throw FormatError(what + ": expected " + std::to_string(a.byte_size()) + " bytes, found " +
                      std::to_string(bytes.size()));
  a.values.resize(static_cast<Eigen::Index>(a.element_count()));
  std::memcpy(a.values.data(), bytes.data() + kVsfHeaderBytes, 16 * a.element_count());
  return a;
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError("read failed: " + path.string());
  return bytes;
}

void write_vsf(const std::filesystem::path& path, const VsfArray& a) {
  const auto bytes = encode_vsf(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

VsfArray read_vsf(const std::filesystem::path& path) { return decode_vsf(read_file_bytes(path), path.string()); }

CVector expect_grid(const VsfArray& a, const Grid2D& grid, const std::string& what) {
  if (a.rank != 2 || a.dims[0] != grid.ny() || a.dims[1] != grid.nx())
    throw FormatError(what + ": expected a " + std::to_string(grid.ny()) + "x" + std::to_string(grid.nx()) + " array");
  return a.values;
}

CVector expect_vector(const VsfArray& a, std::size_t n, const std::string& what) {
  if (a.element_count() != n || (a.rank == 2 && a.dims[1] != 1))
    throw FormatError(what + ": expected " + std::to_string(n) + " values");
  return a.values;
}

Mask expect_mask(const VsfArray& a, const Grid2D& grid, const std::string& what) {
  const CVector v = expect_grid(a, grid, what);
  Mask m(grid.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const cplx x = v[static_cast<Eigen::Index>(i)];
    if (x != cplx{0.0} && x != cplx{1.0}) throw FormatError(what + ": mask entries must be 0 or 1");
    m[i] = x == cplx{1.0};
  }
  return m;
}

CMatrix to_matrix(const VsfArray& a) {
  CMatrix out(a.dims[0], a.dims[1]);
  for (std::uint32_t r = 0; r < a.dims[0]; ++r)
    for (std::uint32_t c = 0; c < a.dims[1]; ++c) out(r, c) = a.values[std::size_t{r} * a.dims[1] + c];
  return out;
}

}  // namespace incscat
