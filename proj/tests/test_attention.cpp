#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <flatpar/attention.hpp>
#include <flatpar/pool.hpp>

using namespace flatpar;
using namespace flatpar::attn;

namespace {

// Test-side oracle: full attention in double precision, straightforward
// triple loops.
std::vector<double> oracle_attention(const AttentionProblem& p) {
  const std::size_t N = p.N, d = p.d;
  std::vector<double> out(N * d, 0.0);
  std::vector<double> s(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t)
        acc += static_cast<double>(p.Q.at(i, t)) * p.K.at(j, t);
      if (p.scale_scores) acc /= std::sqrt(static_cast<double>(d));
      s[j] = acc;
    }
    double m = s[0];
    for (double x : s) m = std::max(m, x);
    double l = 0.0;
    for (double& x : s) {
      x = std::exp(x - m);
      l += x;
    }
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t t = 0; t < d; ++t)
        out[i * d + t] += s[j] / l * p.V.at(j, t);
  }
  return out;
}

double max_abs_diff(const Mat& got, const Mat& want) {
  REQUIRE(got.rows == want.rows);
  REQUIRE(got.cols == want.cols);
  double m = 0.0;
  for (std::size_t i = 0; i < got.a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(got.a[i]) - want.a[i]));
  return m;
}

double max_abs_diff(const Mat& got, const std::vector<double>& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < got.a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(got.a[i]) - want[i]));
  return m;
}

}  // namespace

TEST_CASE("matmul_nt on hand values") {
  Mat A(2, 2, {1, 2, 3, 4});
  Mat B(2, 2, {5, 6, 7, 8});
  Mat C = matmul_nt(A, B);  // C[i][j] = <A_i, B_j>
  CHECK(C.a == std::vector<float>{17, 23, 39, 53});
  Mat r(1, 3, {1, 2, 3});
  CHECK(matmul_nt(r, r).a == std::vector<float>{14});
  CHECK_THROWS_AS((void)matmul_nt(A, r), std::invalid_argument);
  CHECK_THROWS_AS(Mat(2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("stable_softmax against a double-precision oracle") {
  std::mt19937_64 rng{11};
  std::uniform_real_distribution<float> dist(-5.0f, 5.0f);
  Mat S(16, 40);
  for (auto& x : S.a) x = dist(rng);
  Mat P = stable_softmax(S);
  for (std::size_t i = 0; i < S.rows; ++i) {
    double m = S.at(i, 0);
    for (std::size_t j = 0; j < S.cols; ++j)
      m = std::max(m, static_cast<double>(S.at(i, j)));
    double l = 0.0;
    for (std::size_t j = 0; j < S.cols; ++j)
      l += std::exp(static_cast<double>(S.at(i, j)) - m);
    double sum = 0.0;
    for (std::size_t j = 0; j < S.cols; ++j) {
      const double want = std::exp(static_cast<double>(S.at(i, j)) - m) / l;
      CHECK(std::abs(P.at(i, j) - want) <= 1e-6);
      sum += P.at(i, j);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-5);
  }
}

TEST_CASE("online_softmax with tile == row length is stable_softmax, bitwise") {
  std::mt19937_64 rng{12};
  std::uniform_real_distribution<float> dist(-20.0f, 20.0f);
  Mat S(32, 96);
  for (auto& x : S.a) x = dist(rng);
  Mat a = stable_softmax(S);
  Mat b = online_softmax(S, S.cols);
  CHECK(a.a == b.a);
}

TEST_CASE("online_softmax across tile sizes") {
  std::mt19937_64 rng{13};
  std::uniform_real_distribution<float> dist(-10.0f, 10.0f);
  Mat S(24, 64);
  for (auto& x : S.a) x = dist(rng);
  Mat ref = stable_softmax(S);
  for (std::size_t tile : {8ul, 16ul, 32ul}) {
    Mat t = online_softmax(S, tile);
    CHECK(max_abs_diff(t, ref) <= 2e-6);
    for (std::size_t i = 0; i < t.rows; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < t.cols; ++j) sum += t.at(i, j);
      CHECK(std::abs(sum - 1.0) <= 1e-5);
    }
  }
  CHECK_THROWS_AS((void)online_softmax(S, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)online_softmax(S, 7), std::invalid_argument);
}

TEST_CASE("softmax is invariant under a constant shift") {
  std::mt19937_64 rng{14};
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  Mat S(8, 32);
  for (auto& x : S.a) x = dist(rng);
  Mat shifted = S;
  for (auto& x : shifted.a) x += 2.0f;
  CHECK(max_abs_diff(stable_softmax(shifted), stable_softmax(S)) <= 1e-6);
}

TEST_CASE("standard_attention against the double oracle") {
  // Small d and narrow entries keep f32 rounding well under the tolerance.
  auto p = random_problem(64, 8, 21, -1.0f, 1.0f);
  Mat got = standard_attention(p);
  CHECK(max_abs_diff(got, oracle_attention(p)) <= 1e-5);

  // N = 1: softmax over one score is exactly 1, output is the V row.
  auto single = random_problem(1, 4, 22);
  Mat out = standard_attention(single);
  CHECK(out.a == single.V.a);

  CHECK_THROWS_AS((void)standard_attention(random_problem(32, 4, 1), 16),
                  std::invalid_argument);
  AttentionProblem bad = random_problem(8, 4, 2);
  bad.K = Mat(8, 3);
  CHECK_THROWS_AS((void)standard_attention(bad), std::invalid_argument);
}

TEST_CASE("custom_attention agrees with standard_attention") {
  for (auto [N, d] : {std::pair<std::size_t, std::size_t>{128, 16},
                      {256, 32},
                      {512, 64}}) {
    auto p = random_problem(N, d, 31 + N);
    CHECK(max_abs_diff(custom_attention(p), standard_attention(p)) <= 1e-3);
  }
  auto odd = random_problem(12, 8, 3);
  CHECK_THROWS_AS((void)custom_attention(odd), std::invalid_argument);
}

TEST_CASE("flash_attention agrees with standard_attention") {
  for (auto [N, d] : {std::pair<std::size_t, std::size_t>{128, 16},
                      {512, 64},
                      {1024, 64}}) {
    auto p = random_problem(N, d, 41 + N);
    TileConfig cfg;
    cfg.Ti = std::min<std::size_t>(64, N);
    cfg.Tj = std::min<std::size_t>(64, N);
    CHECK(max_abs_diff(flash_attention(p, cfg), standard_attention(p)) <=
          1e-3);
  }
  // Degenerate tiles covering the whole problem at once.
  auto p = random_problem(32, 8, 5);
  CHECK(max_abs_diff(flash_attention(p, {32, 32}), standard_attention(p)) <=
        1e-4);
  CHECK_THROWS_AS((void)flash_attention(p, {5, 32}), std::invalid_argument);
  CHECK_THROWS_AS((void)flash_attention(p, {32, 0}), std::invalid_argument);
}

TEST_CASE("flash tile sweep is stable in Tj") {
  auto p = random_problem(256, 32, 61);
  Mat ref = flash_attention(p, {64, 256});
  for (std::size_t tj : {16ul, 32ul, 64ul, 128ul}) {
    CHECK(max_abs_diff(flash_attention(p, {64, tj}), ref) <= 2e-5);
  }
}

TEST_CASE("flash attention weights sum to one") {
  // With V identically one, the output is exactly the row-wise sum of the
  // attention weights.
  auto p = random_problem(256, 16, 71);
  for (auto& x : p.V.a) x = 1.0f;
  Mat out = flash_attention(p, {64, 64});
  for (float x : out.a) CHECK(std::abs(x - 1.0f) <= 1e-5f);
}

TEST_CASE("flash workspace stays linear, never N x N") {
  const std::size_t N = 1024, d = 32;
  auto p = random_problem(N, d, 81);
  const TileConfig cfg{64, 64};
  set_thread_count(1);
  FlashStats stats;
  (void)flash_attention(p, cfg, &stats);
  set_thread_count(0);
  const std::size_t per_block = (cfg.Ti * cfg.Tj + 2 * cfg.Ti) * sizeof(float);
  CHECK(stats.peak_workspace_bytes == per_block);
  CHECK(stats.peak_workspace_bytes < N * N * sizeof(float));
}

TEST_CASE("scaled-score mode matches the scaled oracle") {
  auto p = random_problem(64, 16, 91);
  p.scale_scores = true;
  CHECK(max_abs_diff(standard_attention(p), oracle_attention(p)) <= 1e-4);
  CHECK(max_abs_diff(flash_attention(p, {32, 32}), standard_attention(p)) <=
        1e-4);
}

TEST_CASE("flop count formula") {
  CHECK(attention_flops(1, 1) == 9);
  CHECK(attention_flops(16384, 64) == 16384ULL * 16384ULL * 261ULL);
  CHECK(attention_flops(10, 0) == 500);
}
