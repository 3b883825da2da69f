#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <flatpar/combinators.hpp>
#include <flatpar/par_array.hpp>
#include <flatpar/pool.hpp>

using namespace flatpar;

namespace {

// Test-side oracles: plain sequential loops, independent of the library.
// Float reductions replicate the fixed 4096-chunk tree so results must be
// bit-exact, not just close.

template <typename E, typename Op>
E oracle_reduce_chunked(const std::vector<E>& xs, Op op, E neutral) {
  const std::size_t n = xs.size();
  std::vector<E> partials;
  for (std::size_t lo = 0; lo < n; lo += kReduceChunk) {
    const std::size_t hi = std::min(lo + kReduceChunk, n);
    E acc = neutral;
    for (std::size_t i = lo; i < hi; ++i) acc = op(acc, xs[i]);
    partials.push_back(acc);
  }
  E acc = neutral;
  for (const E& p : partials) acc = op(acc, p);
  return acc;
}

template <typename E, typename Op>
std::vector<E> oracle_scan_chunked(const std::vector<E>& xs, Op op, E neutral,
                                   bool inclusive) {
  const std::size_t n = xs.size();
  std::vector<E> out(n);
  E carry = neutral;
  for (std::size_t lo = 0; lo < n; lo += kReduceChunk) {
    const std::size_t hi = std::min(lo + kReduceChunk, n);
    E chunk_sum = neutral;
    E local = neutral;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!inclusive) out[i] = op(carry, local);
      local = op(local, xs[i]);
      if (inclusive) out[i] = op(carry, local);
      chunk_sum = op(chunk_sum, xs[i]);
    }
    carry = op(carry, chunk_sum);
  }
  return out;
}

// Segment-at-a-time segmented scan: each segment scanned in isolation with
// the chunk-free left fold. Used only with exact (integer) elements.
template <typename E, typename Op>
std::vector<E> oracle_segmented_scan(const std::vector<E>& xs,
                                     const std::vector<std::uint8_t>& flags,
                                     Op op, E neutral, bool inclusive) {
  std::vector<E> out(xs.size());
  E acc = neutral;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (flags[i]) acc = neutral;
    if (!inclusive) out[i] = acc;
    acc = op(acc, xs[i]);
    if (inclusive) out[i] = acc;
  }
  return out;
}

template <typename E, typename Op>
std::vector<E> oracle_reduce_by_index_chunked(
    std::vector<E> dest, const std::vector<std::int64_t>& idx,
    const std::vector<E>& vals, Op op) {
  const std::size_t n = idx.size();
  for (std::size_t k = 0; k < dest.size(); ++k) {
    E acc = dest[k];
    for (std::size_t lo = 0; lo < n; lo += kReduceChunk) {
      const std::size_t hi = std::min(lo + kReduceChunk, n);
      bool any = false;
      E part{};
      for (std::size_t i = lo; i < hi; ++i) {
        if (idx[i] != static_cast<std::int64_t>(k)) continue;
        part = any ? op(part, vals[i]) : vals[i];
        any = true;
      }
      if (any) acc = op(acc, part);
    }
    dest[k] = acc;
  }
  return dest;
}

const std::size_t kLens[] = {0, 1, 2, 7, 1000, 100000};

std::vector<double> rand_doubles(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

std::vector<std::int64_t> rand_ints(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = static_cast<std::int64_t>(rng() % 2001) - 1000;
  return v;
}

struct ThreadGuard {
  ~ThreadGuard() { set_thread_count(0); }
};

}  // namespace

TEST_CASE("replicate and tabulate basics") {
  CHECK(replicate(4, 9).values() == std::vector<int>{9, 9, 9, 9});
  CHECK(replicate(0, 1.5).empty());
  auto t = tabulate(5, [](std::size_t i) { return i * i; });
  CHECK(t.values() == std::vector<std::size_t>{0, 1, 4, 9, 16});
}

TEST_CASE("map and map2 basics") {
  ParArray<int> xs{1, 2, 3};
  auto doubled = map(xs, [](int x) { return 2 * x; });
  CHECK(doubled.values() == std::vector<int>{2, 4, 6});
  ParArray<int> ys{10, 20, 30};
  auto sums = map2(xs, ys, [](int a, int b) { return a + b; });
  CHECK(sums.values() == std::vector<int>{11, 22, 33});
  ParArray<int> bad{1};
  CHECK_THROWS_AS((void)map2(xs, bad, [](int a, int b) { return a + b; }),
                  std::invalid_argument);
}

TEST_CASE("reduce and scan basics") {
  ParArray<std::int64_t> xs{1, 2, 3, 4};
  CHECK(reduce(xs, sum_monoid<std::int64_t>()) == 10);
  CHECK(reduce(ParArray<std::int64_t>{}, sum_monoid<std::int64_t>()) == 0);
  CHECK(scan(xs, sum_monoid<std::int64_t>(), ScanMode::inclusive).values() ==
        std::vector<std::int64_t>{1, 3, 6, 10});
  CHECK(scan(xs, sum_monoid<std::int64_t>(), ScanMode::exclusive).values() ==
        std::vector<std::int64_t>{0, 1, 3, 6});
  CHECK(reduce(ParArray<int>{3, -1, 7, 2}, max_monoid(-100)) == 7);
}

TEST_CASE("segmented scan basics") {
  SegmentedVector<std::int64_t> sv{ParArray<std::int64_t>{1, 2, 3, 4, 5},
                                   ParArray<std::uint8_t>{1, 0, 1, 0, 0}};
  CHECK(sv.segment_count() == 2);
  CHECK(segmented_scan(sv, sum_monoid<std::int64_t>(), ScanMode::inclusive)
            .values() == std::vector<std::int64_t>{1, 3, 3, 7, 12});
  CHECK(segmented_scan(sv, sum_monoid<std::int64_t>(), ScanMode::exclusive)
            .values() == std::vector<std::int64_t>{0, 1, 0, 3, 7});
  CHECK_THROWS_AS((SegmentedVector<int>{ParArray<int>{1, 2},
                                        ParArray<std::uint8_t>{0, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS((SegmentedVector<int>{ParArray<int>{1, 2},
                                        ParArray<std::uint8_t>{1}}),
                  std::invalid_argument);
}

TEST_CASE("scatter and gather basics") {
  ParArray<int> dest{0, 0, 0, 0};
  ParArray<std::int64_t> idx{2, 0, -1};
  ParArray<int> vals{5, 6, 7};
  CHECK(scatter(dest, idx, vals).values() == std::vector<int>{6, 0, 5, 0});
  CHECK_THROWS_AS((void)scatter(dest, ParArray<std::int64_t>{4},
                                ParArray<int>{1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)scatter(dest, ParArray<std::int64_t>{1, 2},
                                ParArray<int>{1}),
                  std::invalid_argument);

  ParArray<int> src{10, 11, 12};
  CHECK(gather(src, ParArray<std::int64_t>{2, 2, 0}).values() ==
        std::vector<int>{12, 12, 10});
  CHECK_THROWS_AS((void)gather(src, ParArray<std::int64_t>{3}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)gather(src, ParArray<std::int64_t>{-1}),
                  std::invalid_argument);
}

TEST_CASE("partition is stable") {
  ParArray<int> xs{5, 2, 8, 1, 9, 4};
  auto [evens, odds] = partition(xs, [](int x) { return x % 2 == 0; });
  CHECK(evens.values() == std::vector<int>{2, 8, 4});
  CHECK(odds.values() == std::vector<int>{5, 1, 9});
  auto [all, none] = partition(xs, [](int) { return true; });
  CHECK(all == xs);
  CHECK(none.empty());
}

TEST_CASE("reduce_by_index basics") {
  ParArray<std::int64_t> dest{100, 200, 300};
  ParArray<std::int64_t> idx{0, 2, 0, 2};
  ParArray<std::int64_t> vals{1, 2, 3, 4};
  auto out = reduce_by_index(dest, sum_monoid<std::int64_t>(), idx, vals);
  CHECK(out.values() == std::vector<std::int64_t>{104, 200, 306});
  CHECK_THROWS_AS((void)reduce_by_index(dest, sum_monoid<std::int64_t>(),
                                        ParArray<std::int64_t>{3},
                                        ParArray<std::int64_t>{1}),
                  std::invalid_argument);
  auto noncommutative =
      make_monoid([](std::int64_t a, std::int64_t b) { return a; },
                  std::int64_t{0}, false);
  CHECK_THROWS_AS((void)reduce_by_index(dest, noncommutative, idx, vals,
                                        {.deterministic = false}),
                  std::invalid_argument);
}

TEST_CASE("monoid laws for the stock monoids") {
  auto sum = sum_monoid<double>();
  auto mx = max_monoid(-1e300);
  std::mt19937_64 rng{99};
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double a = dist(rng), b = dist(rng), c = dist(rng);
    // fp addition is only approximately associative; identities are exact
    CHECK(sum.op(sum.op(a, b), c) ==
          doctest::Approx(sum.op(a, sum.op(b, c))).epsilon(1e-12));
    CHECK(sum.op(a, sum.neutral) == a);
    CHECK(sum.op(sum.neutral, a) == a);
    CHECK(mx.op(mx.op(a, b), c) == mx.op(a, mx.op(b, c)));
    CHECK(mx.op(a, mx.neutral) == a);
    const auto isum = sum_monoid<std::int64_t>();
    const std::int64_t ia = rng() % 1000, ib = rng() % 1000, ic = rng() % 1000;
    CHECK(isum.op(isum.op(ia, ib), ic) == isum.op(ia, isum.op(ib, ic)));
  }
}

TEST_CASE("scan tail equals reduce, bit for bit") {
  std::mt19937_64 rng{7};
  for (std::size_t n : {1ul, 7ul, 4096ul, 4097ul, 100000ul}) {
    auto xs = ParArray<double>{rand_doubles(n, rng)};
    auto incl = scan(xs, sum_monoid<double>(), ScanMode::inclusive);
    CHECK(incl[n - 1] == reduce(xs, sum_monoid<double>()));
  }
}

TEST_CASE("oracle suite: 100 seeded inputs, all ops, threads {1,2,8}") {
  ThreadGuard guard;
  const int threads[] = {1, 2, 8};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng{seed};
    const std::size_t n = kLens[seed % 6];

    const auto dv = rand_doubles(n, rng);
    const auto iv = rand_ints(n, rng);
    ParArray<double> dxs{dv};
    ParArray<std::int64_t> ixs{iv};

    std::vector<std::uint8_t> flags(n, 0);
    if (n > 0) flags[0] = 1;
    for (std::size_t i = 1; i < n; ++i) flags[i] = (rng() % 5 == 0);
    SegmentedVector<std::int64_t> seg{ixs, ParArray<std::uint8_t>{flags}};
    SegmentedVector<double> dseg{dxs, ParArray<std::uint8_t>{flags}};

    std::vector<std::int64_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ParArray<std::int64_t> scatter_idx{perm};
    std::vector<std::int64_t> gi(n);
    for (auto& g : gi) g = n ? static_cast<std::int64_t>(rng() % n) : 0;
    ParArray<std::int64_t> gather_idx{gi};
    const std::size_t buckets = 17;
    std::vector<std::int64_t> bi(n);
    for (auto& b : bi) b = static_cast<std::int64_t>(rng() % buckets);
    ParArray<std::int64_t> bucket_idx{bi};
    ParArray<double> bucket_dest{std::vector<double>(buckets, 0.5)};

    // Expected values from the sequential oracles.
    std::vector<std::int64_t> exp_map(n), exp_map2(n);
    for (std::size_t i = 0; i < n; ++i) {
      exp_map[i] = 3 * iv[i] + 1;
      exp_map2[i] = iv[i] * iv[i] + iv[i];
    }
    const auto dsum = sum_monoid<double>();
    const auto isum = sum_monoid<std::int64_t>();
    const std::int64_t exp_ired =
        std::accumulate(iv.begin(), iv.end(), std::int64_t{0});
    const double exp_dred = oracle_reduce_chunked(
        dv, [](double a, double b) { return a + b; }, 0.0);
    const auto exp_dscan = oracle_scan_chunked(
        dv, [](double a, double b) { return a + b; }, 0.0, true);
    const auto exp_descan = oracle_scan_chunked(
        dv, [](double a, double b) { return a + b; }, 0.0, false);
    const auto exp_sscan = oracle_segmented_scan(
        iv, flags, [](std::int64_t a, std::int64_t b) { return a + b; },
        std::int64_t{0}, true);
    std::vector<std::int64_t> exp_scatter(n, -7);
    for (std::size_t i = 0; i < n; ++i)
      exp_scatter[static_cast<std::size_t>(perm[i])] = iv[i];
    std::vector<std::int64_t> exp_gather(n);
    for (std::size_t i = 0; i < n; ++i)
      exp_gather[i] = iv[static_cast<std::size_t>(gi[i])];
    std::vector<std::int64_t> exp_lhs, exp_rhs;
    for (auto x : iv) (x % 3 == 0 ? exp_lhs : exp_rhs).push_back(x);
    const auto exp_hist = oracle_reduce_by_index_chunked(
        bucket_dest.values(), bi, dv,
        [](double a, double b) { return a + b; });

    std::vector<ParArray<double>> dscan_by_tc, dss_by_tc, hist_by_tc;
    for (int tc : threads) {
      set_thread_count(tc);

      CHECK(map(ixs, [](std::int64_t x) { return 3 * x + 1; }).values() ==
            exp_map);
      CHECK(map2(ixs, ixs, [](std::int64_t a, std::int64_t b) {
              return a * b + b;
            }).values() == exp_map2);
      CHECK(reduce(ixs, isum) == exp_ired);
      CHECK(reduce(dxs, dsum) == exp_dred);
      auto dscan = scan(dxs, dsum, ScanMode::inclusive);
      CHECK(dscan.values() == exp_dscan);
      CHECK(scan(dxs, dsum, ScanMode::exclusive).values() == exp_descan);
      CHECK(segmented_scan(seg, isum, ScanMode::inclusive).values() ==
            exp_sscan);
      // Segmented scan over doubles must match across thread counts even
      // though the oracle above only covers exact integers.
      auto dss = segmented_scan(dseg, dsum, ScanMode::inclusive);
      CHECK(scatter(replicate<std::int64_t>(n, -7), scatter_idx, ixs)
                .values() == exp_scatter);
      CHECK(gather(ixs, gather_idx).values() == exp_gather);
      auto [lhs, rhs] = partition(ixs, [](std::int64_t x) { return x % 3 == 0; });
      CHECK(lhs.values() == exp_lhs);
      CHECK(rhs.values() == exp_rhs);
      auto hist = reduce_by_index(bucket_dest, dsum, bucket_idx, dxs);
      CHECK(hist.values() == exp_hist);

      dscan_by_tc.push_back(std::move(dscan));
      dss_by_tc.push_back(std::move(dss));
      hist_by_tc.push_back(std::move(hist));
    }
    for (std::size_t k = 1; k < dscan_by_tc.size(); ++k) {
      CHECK(dscan_by_tc[k] == dscan_by_tc[0]);
      CHECK(dss_by_tc[k] == dss_by_tc[0]);
      CHECK(hist_by_tc[k] == hist_by_tc[0]);
    }

    // Single-segment segmented scan equals the plain scan.
    if (n > 0) {
      std::vector<std::uint8_t> one(n, 0);
      one[0] = 1;
      SegmentedVector<double> single{dxs, ParArray<std::uint8_t>{one}};
      CHECK(segmented_scan(single, dsum, ScanMode::inclusive).values() ==
            exp_dscan);
    }
  }
}

TEST_CASE("atomic reduce_by_index matches deterministic mode for int sums") {
  std::mt19937_64 rng{5};
  const std::size_t n = 50000, buckets = 64;
  std::vector<std::int64_t> idx(n), vals(n);
  for (auto& i : idx) i = static_cast<std::int64_t>(rng() % buckets);
  for (auto& v : vals) v = static_cast<std::int64_t>(rng() % 100);
  ParArray<std::int64_t> dest{std::vector<std::int64_t>(buckets, 0)};
  ParArray<std::int64_t> pidx{idx}, pvals{vals};
  auto det = reduce_by_index(dest, sum_monoid<std::int64_t>(), pidx, pvals);
  auto atomic = reduce_by_index(dest, sum_monoid<std::int64_t>(), pidx, pvals,
                                {.deterministic = false});
  CHECK(det == atomic);
}

TEST_CASE("nested parallel tabulate runs inline and stays correct") {
  auto out = tabulate(100, [](std::size_t i) {
    auto inner = tabulate(50, [&](std::size_t j) {
      return static_cast<std::int64_t>(i * j);
    });
    return reduce(inner, sum_monoid<std::int64_t>());
  });
  for (std::size_t i = 0; i < 100; ++i)
    CHECK(out[i] == static_cast<std::int64_t>(i) * (49 * 50 / 2));
}
