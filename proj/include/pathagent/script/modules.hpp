#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathagent/script/value.hpp"

namespace pathagent::script {

/// Mersenne Twister with CPython's seeding (init_by_array over the 32-bit
/// words of the seed) and CPython's derived draws, so that seeded sequences
/// match `random.seed(n)` in CPython.
class RandomState {
 public:
  explicit RandomState(std::uint64_t seed = 42) { this->seed(seed); }
  void seed(std::uint64_t s);
  std::uint32_t next_u32();
  /// 53-bit float in [0, 1).
  double random();
  std::uint64_t getrandbits(int k);
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t randbelow(std::uint64_t n);
  double gauss(double mu, double sigma);

 private:
  void init_genrand(std::uint32_t s);
  std::array<std::uint32_t, 624> mt_{};
  int mti_ = 625;
  std::optional<double> gauss_next_;
};

/// Names of the host-implemented module shims.
const std::vector<std::string>& shim_module_names();

/// Builds the shim for an allowed module. Raises ModuleNotFoundError for
/// names without a shim.
Value make_module(std::string_view name);

/// pathlib.Path value for `p`.
Value make_path(std::string p);

/// If `v` is a Path, its string form.
std::optional<std::string> path_string(const Value& v);

}  // namespace pathagent::script
