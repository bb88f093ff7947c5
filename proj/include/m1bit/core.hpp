// Shared dense-type aliases and a small deterministic parallel-for helper.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace m1bit {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks with a
/// fixed chunk->thread assignment, so results that are written to disjoint
/// slots are deterministic for a fixed thread count.
inline void parallel_for(Index n, const std::function<void(Index)>& fn,
                         unsigned max_threads = 0) {
  if (n <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  unsigned nt = max_threads == 0 ? (hw == 0 ? 1 : hw) : max_threads;
  if (nt > static_cast<unsigned>(n)) nt = static_cast<unsigned>(n);
  if (nt <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(nt);
  const Index chunk = (n + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    const Index lo = static_cast<Index>(t) * chunk;
    const Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (Index i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

/// FNV-1a over raw bytes; used for cheap state-snapshot hashing.
inline std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace m1bit
