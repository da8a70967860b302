#ifndef SOPP_MATRIX_IO_HPP_
#define SOPP_MATRIX_IO_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sopp/common.hpp"

namespace sopp {

// Cache file for square distance matrices: an 8-byte magic and the dimension
// as u64, followed by the row-major payload as little-endian f64.
inline constexpr char kDistanceMagic[8] = {'S', 'O', 'P', 'P',
                                           'D', 'S', 'T', '1'};

inline void save_distance_matrix(const DenseMatrix& m,
                                 const std::filesystem::path& path) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("save_distance_matrix: matrix must be square");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write distance cache: " + path.string());
  }
  out.write(kDistanceMagic, sizeof(kDistanceMagic));
  io::write_le<std::uint64_t>(out, m.rows());
  for (double v : m.data()) io::write_le<double>(out, v);
  if (!out) {
    throw std::runtime_error("failed writing distance cache: " + path.string());
  }
}

inline DenseMatrix load_distance_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open distance cache: " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDistanceMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("bad distance cache header: " + path.string());
  }
  const auto dim = io::read_le<std::uint64_t>(in);
  DenseMatrix m(dim, dim);
  for (double& v : m.data()) v = io::read_le<double>(in);
  if (!in) {
    throw std::runtime_error("truncated distance cache: " + path.string());
  }
  return m;
}

}  // namespace sopp

#endif  // SOPP_MATRIX_IO_HPP_
