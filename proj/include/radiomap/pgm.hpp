#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

/// Writes an 8-bit binary PGM (P5, maxval 255). Values must lie in [0, 1].
inline void save_pgm(const Grid& grid, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(grid.size());
  auto v = grid.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0))
      throw DataError("save_pgm: value outside [0,1] at index " + std::to_string(i));
    bytes[i] = static_cast<unsigned char>(std::lround(v[i] * 255.0));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

namespace detail {

inline void skip_pgm_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pgm_int(std::istream& in, const std::string& what) {
  skip_pgm_space(in);
  int value = -1;
  if (!(in >> value) || value < 0) throw DataError("malformed PGM header: bad " + what);
  return value;
}

}  // namespace detail

inline Grid load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw DataError("not a P5 PGM: " + path.string());
  const int width = detail::read_pgm_int(in, "width");
  const int height = detail::read_pgm_int(in, "height");
  const int maxval = detail::read_pgm_int(in, "maxval");
  if (maxval != 255) throw DataError("unsupported PGM maxval " + std::to_string(maxval));
  const int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') throw DataError("malformed PGM header");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw DataError("PGM payload size mismatch in " + path.string() + ": expected " +
                    std::to_string(bytes.size()) + " bytes, got " + std::to_string(in.gcount()));
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("PGM payload size mismatch in " + path.string() + ": trailing bytes");
  std::vector<double> values(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) values[i] = bytes[i] / 255.0;
  return Grid(height, width, std::move(values));
}

}  // namespace radiomap
