#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace bellturb {

using Engine = std::mt19937_64;

// Samples are produced in fixed-size chunks, each with its own sub-seed.
inline constexpr std::size_t kChunkSize = 4096;

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives the seed of sub-stream `stream` from `root`:
/// splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019)).
constexpr std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t chunk) {
  return Engine(mix_seed(seed, chunk));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1).
inline double uniform_open(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Work is
// assigned by index so any side effects keyed by i are order independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

inline std::size_t chunk_count(std::size_t count) { return (count + kChunkSize - 1) / kChunkSize; }

}  // namespace bellturb
