#pragma once
// Counter-based RNG streams for replica-parallel Monte Carlo.
//
// A stream is keyed by (master seed, operation tag, replica index). Draws on
// one stream never depend on thread count or scheduling, so every estimator
// built on top of make_stream() is reproducible for any worker count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <thread>
#include <vector>

namespace bpire {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// FNV-1a; turns an operation name into a stream tag at compile time.
constexpr std::uint64_t op_tag(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// SplitMix64 counter generator. Satisfies UniformRandomBitGenerator, so it
// plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ tag) ^ (kGoldenGamma * (index + 1)));
}

inline CounterRng make_stream(std::uint64_t seed, std::string_view op,
                              std::uint64_t index) {
  return CounterRng(stream_key(seed, op_tag(op), index));
}

// Uniform on [0,1).
inline double uniform01(CounterRng& g) { return (g() >> 11) * 0x1.0p-53; }

// Uniform on the open interval (0,1); safe under log().
inline double uniform_open(CounterRng& g) {
  return ((g() >> 12) + 0.5) * 0x1.0p-52;
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Replicas are processed in fixed-size blocks. Block boundaries are
// independent of the worker count; per-block partials are merged in block
// order, which keeps floating-point reductions bit-identical for any number
// of threads.
inline constexpr std::uint64_t kReduceBlock = 8192;

template <class Acc, class BlockFn, class MergeFn>
Acc parallel_reduce(std::uint64_t n_items, unsigned workers, Acc init,
                    BlockFn per_block, MergeFn merge) {
  if (n_items == 0) return init;
  const std::uint64_t n_blocks = (n_items + kReduceBlock - 1) / kReduceBlock;
  workers = resolve_workers(workers);
  if (workers > n_blocks) workers = static_cast<unsigned>(n_blocks);

  auto block_range = [&](std::uint64_t b) {
    const std::uint64_t lo = b * kReduceBlock;
    const std::uint64_t hi = std::min(n_items, lo + kReduceBlock);
    return std::pair<std::uint64_t, std::uint64_t>(lo, hi);
  };

  if (workers <= 1) {
    Acc total = std::move(init);
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
      auto [lo, hi] = block_range(b);
      Acc part = per_block(lo, hi);
      merge(total, part);
    }
    return total;
  }

  std::vector<Acc> parts(n_blocks);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) break;
      auto [lo, hi] = block_range(b);
      parts[b] = per_block(lo, hi);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  Acc total = std::move(init);
  for (std::uint64_t b = 0; b < n_blocks; ++b) merge(total, parts[b]);
  return total;
}

// Neumaier compensated accumulator; enumeration sums need the extra digits.
class KahanSum {
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
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bpire
