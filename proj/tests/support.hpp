#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "esmc/rng.hpp"
#include "esmc/types.hpp"

namespace testsupport {

inline esmc::Matrix random_matrix(int rows, int cols, esmc::Rng& rng, double scale = 1.0) {
  esmc::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline esmc::Matrix random_binary(int rows, int cols, esmc::Rng& rng, double p_one = 0.3) {
  esmc::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform() < p_one ? 1.0 : 0.0;
  return m;
}

// Scratch directory cleaned up on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("esmc_test_" + tag + "_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
