#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flatpar/par_array.hpp"
#include "flatpar/pool.hpp"

namespace flatpar {

// Chunk size of the fixed reduction tree: reduce/scan fold sequentially
// within ceil(len/4096) chunks and then left-to-right across the chunk
// partials. Chunk boundaries depend only on the length, never on the
// worker count, so floating-point results are reproducible.
inline constexpr std::size_t kReduceChunk = 4096;

enum class ScanMode { inclusive, exclusive };

namespace detail {

inline std::size_t chunk_count(std::size_t n) {
  return (n + kReduceChunk - 1) / kReduceChunk;
}

// Block size for elementwise work; has no effect on results.
inline std::size_t map_block(std::size_t n) {
  std::size_t target = static_cast<std::size_t>(thread_count()) * 8;
  std::size_t bs = (n + target - 1) / target;
  if (bs > kReduceChunk) bs = kReduceChunk;
  return bs == 0 ? 1 : bs;
}

template <typename F>
void blocked_for(std::size_t n, F&& body) {
  if (n == 0) return;
  const std::size_t bs = map_block(n);
  const std::size_t blocks = (n + bs - 1) / bs;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * bs;
    const std::size_t hi = lo + bs < n ? lo + bs : n;
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace detail

template <typename E>
ParArray<E> replicate(std::size_t n, const E& x) {
  return ParArray<E>(std::vector<E>(n, x));
}

template <typename F>
auto tabulate(std::size_t n, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  detail::blocked_for(n, [&](std::size_t i) { out[i] = f(i); });
  return ParArray<R>(std::move(out));
}

// Bulk tabulation of a regular rows x cols result; f fills one row at a
// time so per-row scratch can be reused across the inner dimension.
template <typename E, typename F>
ParArray<E> tabulate_2d(std::size_t rows, std::size_t cols, F&& f) {
  std::vector<E> out(rows * cols);
  parallel_for(rows, [&](std::size_t r) {
    f(r, std::span<E>(out.data() + r * cols, cols));
  });
  return ParArray<E>(std::move(out));
}

template <typename A, typename F>
auto map(const ParArray<A>& xs, F&& f) {
  return tabulate(xs.size(), [&](std::size_t i) { return f(xs[i]); });
}

template <typename A, typename B, typename F>
auto map2(const ParArray<A>& xs, const ParArray<B>& ys, F&& f) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("map2: length mismatch");
  return tabulate(xs.size(), [&](std::size_t i) { return f(xs[i], ys[i]); });
}

// Reduction over f(0), ..., f(n-1) under the fixed chunk tree, without
// materializing the mapped array.
template <typename F, typename E, typename Op>
E reduce_index(std::size_t n, F&& f, const Monoid<E, Op>& m) {
  if (n == 0) return m.neutral;
  const std::size_t chunks = detail::chunk_count(n);
  std::vector<E> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    E acc = m.neutral;
    for (std::size_t i = lo; i < hi; ++i) acc = m.op(acc, f(i));
    partials[c] = acc;
  });
  E acc = m.neutral;
  for (const E& p : partials) acc = m.op(acc, p);
  return acc;
}

template <typename E, typename Op>
E reduce(const ParArray<E>& xs, const Monoid<E, Op>& m) {
  return reduce_index(xs.size(), [&](std::size_t i) { return xs[i]; }, m);
}

template <typename E, typename Op>
ParArray<E> scan(const ParArray<E>& xs, const Monoid<E, Op>& m,
                 ScanMode mode) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  const std::size_t chunks = detail::chunk_count(n);
  std::vector<E> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    E acc = m.neutral;
    for (std::size_t i = lo; i < hi; ++i) acc = m.op(acc, xs[i]);
    partials[c] = acc;
  });
  std::vector<E> prefix(chunks);
  E acc = m.neutral;
  for (std::size_t c = 0; c < chunks; ++c) {
    prefix[c] = acc;
    acc = m.op(acc, partials[c]);
  }
  std::vector<E> out(n);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    E local = m.neutral;
    for (std::size_t i = lo; i < hi; ++i) {
      if (mode == ScanMode::exclusive) out[i] = m.op(prefix[c], local);
      local = m.op(local, xs[i]);
      if (mode == ScanMode::inclusive) out[i] = m.op(prefix[c], local);
    }
  });
  return ParArray<E>(std::move(out));
}

// Scan restarted at every set flag; each segment's result equals the scan
// of that segment in isolation (same chunk tree).
template <typename E, typename Op>
ParArray<E> segmented_scan(const SegmentedVector<E>& sv,
                           const Monoid<E, Op>& m, ScanMode mode) {
  const auto& xs = sv.data();
  const auto& flags = sv.flags();
  const std::size_t n = xs.size();
  if (n == 0) return {};

  struct Pair {
    std::uint8_t flag;
    E val;
  };
  auto seg_op = [&](const Pair& a, const Pair& b) {
    return Pair{static_cast<std::uint8_t>(a.flag | b.flag),
                b.flag ? b.val : m.op(a.val, b.val)};
  };

  const std::size_t chunks = detail::chunk_count(n);
  std::vector<Pair> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    Pair acc{0, m.neutral};
    for (std::size_t i = lo; i < hi; ++i)
      acc = seg_op(acc, Pair{flags[i], xs[i]});
    partials[c] = acc;
  });
  std::vector<Pair> prefix(chunks);
  Pair acc{0, m.neutral};
  for (std::size_t c = 0; c < chunks; ++c) {
    prefix[c] = acc;
    acc = seg_op(acc, partials[c]);
  }
  std::vector<E> incl(n);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    Pair local{0, m.neutral};
    for (std::size_t i = lo; i < hi; ++i) {
      local = seg_op(local, Pair{flags[i], xs[i]});
      incl[i] = seg_op(prefix[c], local).val;
    }
  });
  if (mode == ScanMode::inclusive) return ParArray<E>(std::move(incl));
  std::vector<E> out(n);
  detail::blocked_for(n, [&](std::size_t i) {
    out[i] = flags[i] ? m.neutral : incl[i - 1];
  });
  return ParArray<E>(std::move(out));
}

// Parallel write: copy of dest with dest[indices[i]] = values[i].
// Negative indices are sentinels and skipped. In-bounds duplicates are a
// contract violation: checked in debug builds, unspecified winner in
// release builds.
template <typename E>
ParArray<E> scatter(const ParArray<E>& dest,
                    const ParArray<std::int64_t>& indices,
                    const ParArray<E>& values) {
  if (indices.size() != values.size())
    throw std::invalid_argument("scatter: index/value length mismatch");
  const auto dn = static_cast<std::int64_t>(dest.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] >= dn)
      throw std::invalid_argument("scatter: index out of bounds");
#ifndef NDEBUG
  {
    std::vector<std::uint8_t> seen(dest.size(), 0);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] < 0) continue;
      if (seen[static_cast<std::size_t>(indices[i])]++)
        throw std::invalid_argument("scatter: duplicate in-bounds index");
    }
  }
#endif
  std::vector<E> out(dest.values());
  detail::blocked_for(indices.size(), [&](std::size_t i) {
    if (indices[i] >= 0) out[static_cast<std::size_t>(indices[i])] = values[i];
  });
  return ParArray<E>(std::move(out));
}

template <typename E>
ParArray<E> gather(const ParArray<E>& src,
                   const ParArray<std::int64_t>& indices) {
  const auto sn = static_cast<std::int64_t>(src.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] < 0 || indices[i] >= sn)
      throw std::invalid_argument("gather: index out of bounds");
  return tabulate(indices.size(), [&](std::size_t i) {
    return src[static_cast<std::size_t>(indices[i])];
  });
}

// Stable two-way split, built from map + scan + scatter.
template <typename E, typename Pred>
std::pair<ParArray<E>, ParArray<E>> partition(const ParArray<E>& xs,
                                              Pred&& pred) {
  const std::size_t n = xs.size();
  auto flags = map(xs, [&](const E& x) {
    return static_cast<std::int64_t>(pred(x) ? 1 : 0);
  });
  auto before = scan(flags, sum_monoid<std::int64_t>(), ScanMode::exclusive);
  const std::int64_t total_true = reduce(flags, sum_monoid<std::int64_t>());
  auto targets = tabulate(n, [&](std::size_t i) {
    const auto idx = static_cast<std::int64_t>(i);
    return flags[i] ? before[i] : total_true + (idx - before[i]);
  });
  auto packed = scatter(replicate(n, E{}), targets, xs);
  std::vector<E> lhs(packed.begin(), packed.begin() + total_true);
  std::vector<E> rhs(packed.begin() + total_true, packed.end());
  return {ParArray<E>(std::move(lhs)), ParArray<E>(std::move(rhs))};
}

struct ReduceByIndexOptions {
  // Deterministic: per-chunk partial histograms folded in index order and
  // merged left-to-right. The atomic mode is faster but combines
  // duplicates in an unspecified order and requires a commutative monoid.
  bool deterministic = true;
};

template <typename E, typename Op>
ParArray<E> reduce_by_index(const ParArray<E>& dest, const Monoid<E, Op>& m,
                            const ParArray<std::int64_t>& indices,
                            const ParArray<E>& values,
                            ReduceByIndexOptions opts = {}) {
  if (indices.size() != values.size())
    throw std::invalid_argument("reduce_by_index: length mismatch");
  const auto dn = static_cast<std::int64_t>(dest.size());
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] < 0 || indices[i] >= dn)
      throw std::invalid_argument("reduce_by_index: index out of bounds");

  const std::size_t n = indices.size();
  if (!opts.deterministic) {
    if (!m.commutative)
      throw std::invalid_argument(
          "reduce_by_index: atomic mode requires a commutative monoid");
    std::vector<E> out(dest.values());
    auto locks = std::make_unique<std::atomic_flag[]>(dest.size() ? dest.size() : 1);
    detail::blocked_for(n, [&](std::size_t i) {
      auto k = static_cast<std::size_t>(indices[i]);
      while (locks[k].test_and_set(std::memory_order_acquire)) {
      }
      out[k] = m.op(out[k], values[i]);
      locks[k].clear(std::memory_order_release);
    });
    return ParArray<E>(std::move(out));
  }

  const std::size_t chunks = detail::chunk_count(n);
  std::vector<std::vector<E>> partial(chunks);
  std::vector<std::vector<std::uint8_t>> hit(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    partial[c].assign(dest.size(), m.neutral);
    hit[c].assign(dest.size(), 0);
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    for (std::size_t i = lo; i < hi; ++i) {
      auto k = static_cast<std::size_t>(indices[i]);
      partial[c][k] = hit[c][k] ? m.op(partial[c][k], values[i]) : values[i];
      hit[c][k] = 1;
    }
  });
  return tabulate(dest.size(), [&](std::size_t k) {
    E acc = dest[k];
    for (std::size_t c = 0; c < chunks; ++c)
      if (hit[c][k]) acc = m.op(acc, partial[c][k]);
    return acc;
  });
}

}  // namespace flatpar
