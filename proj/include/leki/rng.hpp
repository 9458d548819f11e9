#pragma once

#include <cstdint>

#include "leki/common.hpp"

namespace leki {

// Role of a derived random stream within one trial.
enum class StreamRole : std::uint64_t { Truth = 1, Noise = 2, Init = 3 };

// Deterministic splittable generator. Each (seed, trial, role) triple yields an
// independent stream, so draws do not depend on scheduling or thread count, and
// the same triple always reproduces the same sequence bit for bit. The core is
// a splitmix64 counter; normals come from Box-Muller on 53-bit uniforms, which
// keeps output identical across platforms (std::normal_distribution is
// implementation-defined and would not).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t trial, StreamRole role);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal

  Vector normal_vector(int n);
  Matrix normal_matrix(int rows, int cols);   // column-major fill
  Matrix uniform_matrix(int rows, int cols, double lo, double hi);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace leki
