#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hsindy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a simulation or solve produces unusable numbers.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; also the seed-splitting rule for every random stream.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Sub-seed for item `index` of stream `stream` under `root`. Depends only on
// its arguments, so generation order and worker count never change draws.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(root ^ mix64(stream)) + index);
}

// Named streams used across the code base.
namespace streams {
inline constexpr std::uint64_t kNoise = 0x6e6f6973;
inline constexpr std::uint64_t kTrainingNoise = 0x7472616e;
inline constexpr std::uint64_t kValidationNoise = 0x76616c6e;
inline constexpr std::uint64_t kSirPerturbation = 0x70657274;
inline constexpr std::uint64_t kSweepInitialConditions = 0x73776963;
inline constexpr std::uint64_t kSweepNoise = 0x73776e7a;
}  // namespace streams

// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
// processed exactly once; callers write results into pre-sized slots.
inline void parallel_for(std::size_t count, unsigned jobs,
                         const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hsindy
