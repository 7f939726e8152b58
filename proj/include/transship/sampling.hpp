#pragma once

// Counter-based uniform sampler and fixed-order sharded reduction. A sample's
// value depends only on (seed, index, stream), so results do not depend on
// thread count or execution order.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace transship {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t bits(std::uint64_t index, std::uint64_t stream) const {
    return splitmix64(splitmix64(key_ ^ index) + stream * 0xd1b54a32d192ed03ULL);
  }

  /// Uniform on [0, 1).
  double uniform(std::uint64_t index, std::uint64_t stream) const {
    return static_cast<double>(bits(index, stream) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

inline constexpr int kShardCount = 16;

/// Runs work(shard, begin, end) over [0, count) split into kShardCount
/// contiguous shards, in parallel; shard results are returned in shard order.
template <class Result, class Work>
std::vector<Result> run_shards(std::uint64_t count, Work work) {
  std::vector<Result> results(kShardCount);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, kShardCount));
  auto range = [count](int s) {
    return std::pair<std::uint64_t, std::uint64_t>{count * s / kShardCount, count * (s + 1) / kShardCount};
  };
  if (workers <= 1) {
    for (int s = 0; s < kShardCount; ++s) results[s] = work(s, range(s).first, range(s).second);
    return results;
  }
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (int s = w; s < kShardCount; s += workers) results[s] = work(s, range(s).first, range(s).second);
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace transship
