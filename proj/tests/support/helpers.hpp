#pragma once

#include <filesystem>
#include <string>

#include "disent/matrix.hpp"
#include "disent/rng.hpp"
#include "oracles.hpp"

namespace testing {

inline disent::Matrix random_matrix(std::size_t r, std::size_t c, disent::Rng& rng,
                                    double scale = 1.0, double shift = 0.0) {
  disent::Matrix m(r, c);
  for (double& v : m.data()) v = shift + scale * rng.normal();
  return m;
}

inline oracle::Rows to_rows(const disent::Matrix& m) {
  oracle::Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("disent_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
