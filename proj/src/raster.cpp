#include "incscat/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "incscat/error.hpp"

namespace incscat {

void RasterShape::validate() const {
  if (width == 0 || height == 0) throw InvalidArgument("raster dimensions must be at least 1");
  if (gray.size() != width * height) throw InvalidArgument("raster pixel count does not match its dimensions");
  for (double g : gray)
    if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("raster intensities must lie in [0, 1]");
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(c);
    }
  }
  return tok;
}

std::size_t pgm_number(std::istream& in, const std::string& what) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(what + ": bad header field '" + tok + "'");
  }
}

}  // namespace

RasterShape read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string what = path.string();
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError(what + ": not a portable graymap");
  RasterShape s;
  s.width = pgm_number(in, what);
  s.height = pgm_number(in, what);
  const std::size_t maxval = pgm_number(in, what);
  if (s.width == 0 || s.height == 0 || maxval == 0 || maxval > 65535) throw FormatError(what + ": bad header");
  s.gray.resize(s.width * s.height);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (double& g : s.gray) {
      const std::size_t v = pgm_number(in, what);
      if (v > maxval) throw FormatError(what + ": sample exceeds maxval");
      g = static_cast<double>(v) * scale;
    }
  } else {
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(s.gray.size() * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw FormatError(what + ": truncated pixel data");
    for (std::size_t p = 0; p < s.gray.size(); ++p) {
      const std::size_t v = bytes == 1 ? raw[p] : (std::size_t{raw[2 * p]} << 8) | raw[2 * p + 1];
      if (v > maxval) throw FormatError(what + ": sample exceeds maxval");
      s.gray[p] = static_cast<double>(v) * scale;
    }
  }
  return s;
}

void write_pgm(const std::filesystem::path& path, const RasterShape& shape) {
  shape.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot create " + path.string());
  out << "P5\n" << shape.width << ' ' << shape.height << "\n255\n";
  for (double g : shape.gray) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(g * 255.0))));
  if (!out) throw FormatError("write failed: " + path.string());
}

void write_heatmap_pgm(const std::filesystem::path& path, const Grid2D& grid, const CVector& values) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) throw InvalidArgument("heatmap: size mismatch");
  const double peak = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  RasterShape img{grid.nx(), grid.ny(), std::vector<double>(grid.size(), 0.0)};
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double v = peak > 0.0 ? std::abs(values[static_cast<Eigen::Index>(grid.index(i, j))]) / peak : 0.0;
      img.gray[(grid.ny() - 1 - j) * grid.nx() + i] = v;
    }
  write_pgm(path, img);
}

namespace {

// Seven-segment layout: a top, b upper right, c lower right, d bottom,
// e lower left, f upper left, g middle.
constexpr unsigned char kGlyphs[10] = {0x3f, 0x06, 0x5b, 0x4f, 0x66, 0x6d, 0x7d, 0x07, 0x7f, 0x6f};

struct Segment {
  double x0, y0, x1, y1;  // unit box, y down
};
constexpr Segment kSegments[7] = {
    {0, 0, 1, 0}, {1, 0, 1, 0.5}, {1, 0.5, 1, 1}, {0, 1, 1, 1}, {0, 0.5, 0, 1}, {0, 0, 0, 0.5}, {0, 0.5, 1, 0.5},
};

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0.0 ? std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

}  // namespace

RasterShape procedural_digit(Rng& rng, std::size_t size) {
  if (size < 8) throw InvalidArgument("procedural_digit: canvas must be at least 8 pixels");
  const auto digit = uniform_index(rng, 10);
  const double n = static_cast<double>(size);
  const double w = n * uniform(rng, 0.35, 0.5);
  const double h = n * uniform(rng, 0.6, 0.75);
  const double stroke = n * uniform(rng, 0.06, 0.1);
  const double slant = uniform(rng, -0.2, 0.2);
  const double ox = 0.5 * (n - w) + n * uniform(rng, -0.05, 0.05);
  const double oy = 0.5 * (n - h) + n * uniform(rng, -0.05, 0.05);

  auto map = [&](double u, double v, double& x, double& y) {
    x = ox + u * w + slant * (0.5 - v) * h;
    y = oy + v * h;
  };
  RasterShape s{size, size, std::vector<double>(size * size, 0.0)};
  for (std::size_t row = 0; row < size; ++row)
    for (std::size_t col = 0; col < size; ++col) {
      const double px = static_cast<double>(col) + 0.5;
      const double py = static_cast<double>(row) + 0.5;
      double d = n;
      for (int k = 0; k < 7; ++k) {
        if (!(kGlyphs[digit] & (1u << k))) continue;
        double ax, ay, bx, by;
        map(kSegments[k].x0, kSegments[k].y0, ax, ay);
        map(kSegments[k].x1, kSegments[k].y1, bx, by);
        d = std::min(d, segment_distance(px, py, ax, ay, bx, by));
      }
      // One-pixel soft edge around the stroke.
      s.gray[row * size + col] = std::clamp(0.5 * stroke - d + 0.5, 0.0, 1.0);
    }
  return s;
}

Quadrant grid_quadrant(const Grid2D& grid, int index) {
  if (index < 0 || index > 3) throw InvalidArgument("quadrant index must be 0..3");
  if (grid.nx() < 2 || grid.ny() < 2) throw InvalidArgument("grid too small to split into quadrants");
  const std::size_t wl = grid.nx() / 2;
  const std::size_t hb = grid.ny() / 2;
  const bool right = index == 1 || index == 3;
  const bool top = index == 0 || index == 1;
  return {right ? wl : 0, top ? hb : 0, right ? grid.nx() - wl : wl, top ? grid.ny() - hb : hb};
}

Mask rasterize_shape(const RasterShape& shape, const Grid2D& grid, const Quadrant& q, double threshold) {
  shape.validate();
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("rasterize_shape: threshold must lie in (0, 1)");
  if (q.width == 0 || q.height == 0 || q.i0 + q.width > grid.nx() || q.j0 + q.height > grid.ny())
    throw InvalidArgument("rasterize_shape: quadrant outside the grid");
  const double scale = std::min(static_cast<double>(q.width) / static_cast<double>(shape.width),
                                static_cast<double>(q.height) / static_cast<double>(shape.height));
  const auto tw = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(shape.width * scale + 1e-9)), 1, q.width);
  const auto th = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(shape.height * scale + 1e-9)), 1, q.height);
  const std::size_t i_off = q.i0 + (q.width - tw) / 2;
  const std::size_t j_off = q.j0 + (q.height - th) / 2;

  Mask occ(grid.size(), false);
  for (std::size_t v = 0; v < th; ++v) {
    // Target row v counts from the top of the placed image.
    const auto row = std::min(shape.height - 1, (2 * v + 1) * shape.height / (2 * th));
    const std::size_t j = j_off + (th - 1 - v);
    for (std::size_t u = 0; u < tw; ++u) {
      const auto col = std::min(shape.width - 1, (2 * u + 1) * shape.width / (2 * tw));
      if (shape.at(col, row) >= threshold) occ[grid.index(i_off + u, j)] = true;
    }
  }
  return occ;
}

}  // namespace incscat
