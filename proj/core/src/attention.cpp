#include "flatpar/attention.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "flatpar/combinators.hpp"

namespace flatpar::attn {

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

std::atomic<std::size_t> g_live_bytes{0};
std::atomic<std::size_t> g_peak_bytes{0};

void track_alloc(std::size_t bytes) {
  const std::size_t live =
      g_live_bytes.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t peak = g_peak_bytes.load(std::memory_order_relaxed);
  while (live > peak &&
         !g_peak_bytes.compare_exchange_weak(peak, live,
                                             std::memory_order_relaxed)) {
  }
}

// Transient scratch whose size shows up in FlashStats.
struct TrackedBuf {
  std::vector<float> v;
  explicit TrackedBuf(std::size_t n) : v(n) {
    track_alloc(n * sizeof(float));
  }
  ~TrackedBuf() {
    g_live_bytes.fetch_sub(v.size() * sizeof(float),
                           std::memory_order_relaxed);
  }
  float& operator[](std::size_t i) { return v[i]; }
};

Mat transpose(const Mat& m) {
  Mat out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
  return out;
}

void softmax_row(const float* s, float* out, std::size_t cols) {
  float m = kNegInf;
  for (std::size_t j = 0; j < cols; ++j) m = std::max(m, s[j]);
  float l = 0.0f;
  for (std::size_t j = 0; j < cols; ++j) l += std::exp(s[j] - m);
  for (std::size_t j = 0; j < cols; ++j) out[j] = std::exp(s[j] - m) / l;
}

void online_softmax_row(const float* s, float* out, std::size_t cols,
                        std::size_t tile) {
  float m = kNegInf;
  float l = 0.0f;
  for (std::size_t jj = 0; jj < cols; jj += tile) {
    float m2 = kNegInf;
    for (std::size_t j = jj; j < jj + tile; ++j) m2 = std::max(m2, s[j]);
    const float m1 = std::max(m, m2);
    float psum = 0.0f;
    for (std::size_t j = jj; j < jj + tile; ++j) psum += std::exp(s[j] - m2);
    const float l1 = std::exp(m2 - m1) * psum;
    l = l1 + l * std::exp(m - m1);
    m = m1;
  }
  for (std::size_t j = 0; j < cols; ++j) out[j] = std::exp(s[j] - m) / l;
}

Mat from_values(std::size_t rows, std::size_t cols, ParArray<float> v) {
  Mat out;
  out.rows = rows;
  out.cols = cols;
  out.a = v.values();
  return out;
}

}  // namespace

Mat::Mat(std::size_t r, std::size_t c, std::vector<float> v)
    : rows(r), cols(c), a(std::move(v)) {
  if (a.size() != rows * cols)
    throw std::invalid_argument("Mat: value count does not match shape");
}

void AttentionProblem::validate() const {
  if (d < 1) throw std::invalid_argument("attention: d must be >= 1");
  auto check = [&](const Mat& m) {
    if (m.rows != N || m.cols != d)
      throw std::invalid_argument("attention: Q/K/V must all be N x d");
  };
  check(Q);
  check(K);
  check(V);
}

Mat matmul_nt(const Mat& A, const Mat& B) {
  if (A.cols != B.cols)
    throw std::invalid_argument("matmul_nt: inner dimensions disagree");
  const std::size_t k = A.cols;
  auto values = tabulate_2d<float>(
      A.rows, B.rows, [&](std::size_t i, std::span<float> out) {
        const float* a = A.row(i);
        for (std::size_t j = 0; j < B.rows; ++j) {
          const float* b = B.row(j);
          float acc = 0.0f;
          for (std::size_t t = 0; t < k; ++t) acc += a[t] * b[t];
          out[j] = acc;
        }
      });
  return from_values(A.rows, B.rows, std::move(values));
}

Mat stable_softmax(const Mat& S) {
  auto values = tabulate_2d<float>(
      S.rows, S.cols, [&](std::size_t i, std::span<float> out) {
        softmax_row(S.row(i), out.data(), S.cols);
      });
  return from_values(S.rows, S.cols, std::move(values));
}

Mat online_softmax(const Mat& S, std::size_t tile) {
  if (tile == 0 || S.cols % tile != 0)
    throw std::invalid_argument("online_softmax: tile must divide row length");
  auto values = tabulate_2d<float>(
      S.rows, S.cols, [&](std::size_t i, std::span<float> out) {
        online_softmax_row(S.row(i), out.data(), S.cols, tile);
      });
  return from_values(S.rows, S.cols, std::move(values));
}

Mat standard_attention(const AttentionProblem& p, std::size_t max_n) {
  p.validate();
  if (p.N > max_n)
    throw std::invalid_argument(
        "standard_attention: N exceeds the quadratic-memory cap");
  Mat S = matmul_nt(p.Q, p.K);
  if (p.scale_scores) {
    const float scale = 1.0f / std::sqrt(static_cast<float>(p.d));
    for (auto& x : S.a) x *= scale;
  }
  const Mat P = stable_softmax(S);
  return matmul_nt(P, transpose(p.V));
}

Mat custom_attention(const AttentionProblem& p) {
  p.validate();
  const std::size_t d = p.d, N = p.N;
  if (N % d != 0)
    throw std::invalid_argument("custom_attention: d must divide N");
  const float scale = 1.0f / std::sqrt(static_cast<float>(d));
  const Mat Vt = transpose(p.V);
  auto values = tabulate_2d<float>(
      N / d, d * d, [&](std::size_t block, std::span<float> out) {
        Mat Qb(d, d);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t t = 0; t < d; ++t)
            Qb.at(i, t) = p.Q.at(block * d + i, t);
        Mat Sb = matmul_nt(Qb, p.K);
        if (p.scale_scores)
          for (auto& x : Sb.a) x *= scale;
        const Mat Pb = online_softmax(Sb, d);
        const Mat Ob = matmul_nt(Pb, Vt);
        for (std::size_t i = 0; i < d * d; ++i) out[i] = Ob.a[i];
      });
  return from_values(N, d, std::move(values));
}

Mat flash_attention(const AttentionProblem& p, TileConfig cfg,
                    FlashStats* stats) {
  p.validate();
  const std::size_t N = p.N, d = p.d, Ti = cfg.Ti, Tj = cfg.Tj;
  if (Ti == 0 || Tj == 0 || N % Ti != 0 || N % Tj != 0)
    throw std::invalid_argument("flash_attention: tiles must divide N");
  const float scale = 1.0f / std::sqrt(static_cast<float>(d));

  g_live_bytes.store(0, std::memory_order_relaxed);
  g_peak_bytes.store(0, std::memory_order_relaxed);

  auto values = tabulate_2d<float>(
      N / Ti, Ti * d, [&](std::size_t block, std::span<float> o_block) {
        const std::size_t ti = block * Ti;
        TrackedBuf m(Ti), l(Ti), s(Ti * Tj);
        for (std::size_t i = 0; i < Ti; ++i) {
          m[i] = kNegInf;
          l[i] = 0.0f;
        }
        for (float& x : o_block) x = 0.0f;

        for (std::size_t tj = 0; tj < N; tj += Tj) {
          for (std::size_t i = 0; i < Ti; ++i) {
            const float* q = p.Q.row(ti + i);
            for (std::size_t j = 0; j < Tj; ++j) {
              const float* kr = p.K.row(tj + j);
              float acc = 0.0f;
              for (std::size_t t = 0; t < d; ++t) acc += q[t] * kr[t];
              s[i * Tj + j] = p.scale_scores ? acc * scale : acc;
            }
          }
          for (std::size_t i = 0; i < Ti; ++i) {
            float row_max = kNegInf;
            for (std::size_t j = 0; j < Tj; ++j)
              row_max = std::max(row_max, s[i * Tj + j]);
            const float m_new = std::max(m[i], row_max);
            float row_sum = 0.0f;
            for (std::size_t j = 0; j < Tj; ++j) {
              s[i * Tj + j] = std::exp(s[i * Tj + j] - m_new);
              row_sum += s[i * Tj + j];
            }
            const float l_tmp = l[i] * std::exp(m[i] - m_new);
            const float l_new = l_tmp + row_sum;
            float* o = o_block.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) {
              float pv = 0.0f;
              for (std::size_t j = 0; j < Tj; ++j)
                pv += s[i * Tj + j] * p.V.at(tj + j, c);
              o[c] = (o[c] * l_tmp + pv) / l_new;
            }
            m[i] = m_new;
            l[i] = l_new;
          }
        }
      });
  if (stats)
    stats->peak_workspace_bytes = g_peak_bytes.load(std::memory_order_relaxed);
  return from_values(N, d, std::move(values));
}

std::uint64_t attention_flops(std::uint64_t N, std::uint64_t d) {
  return N * N * (4 * d + 5);
}

AttentionProblem random_problem(std::size_t N, std::size_t d,
                                std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  auto fill = [&](Mat& m) {
    m = Mat(N, d);
    for (auto& x : m.a) x = dist(rng);
  };
  AttentionProblem p;
  p.N = N;
  p.d = d;
  fill(p.Q);
  fill(p.K);
  fill(p.V);
  return p;
}

}  // namespace flatpar::attn
