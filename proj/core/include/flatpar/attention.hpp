#pragma once

#include <cstdint>
#include <vector>

#include "flatpar/par_array.hpp"

namespace flatpar::attn {

// Row-major f32 matrix.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<float> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0f) {}
  Mat(std::size_t r, std::size_t c, std::vector<float> v);

  float at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  float& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const float* row(std::size_t i) const { return a.data() + i * cols; }
};

struct AttentionProblem {
  Mat Q, K, V;  // all N x d
  std::size_t N = 0, d = 0;
  // Algorithmic default applies softmax directly to Q*K^T; enable to scale
  // scores by 1/sqrt(d) for comparison with external implementations.
  bool scale_scores = false;

  void validate() const;
};

struct TileConfig {
  std::size_t Ti = 64, Tj = 64;
};

// C[i][j] = sum_t A[i][t] * B[j][t], f32 accumulation, sequential over t.
Mat matmul_nt(const Mat& A, const Mat& B);

// Row-wise softmax with max subtraction. Works on any rows x cols shape.
Mat stable_softmax(const Mat& S);

// Tiled softmax maintaining running (max, normalizer) per row; tile must
// divide the row length. With tile == cols this degenerates to
// stable_softmax, bit for bit.
Mat online_softmax(const Mat& S, std::size_t tile);

// O = softmax(Q*K^T)*V, materializing the N x N score matrix. Rejects N
// above the cap (quadratic memory).
Mat standard_attention(const AttentionProblem& p,
                       std::size_t max_n = 8192);

// Processes d-row blocks of Q independently; each block materializes only
// a d x N score slab.
Mat custom_attention(const AttentionProblem& p);

struct FlashStats {
  // Peak bytes of transient per-block workspace, summed over live blocks.
  std::size_t peak_workspace_bytes = 0;
};

// Ti x Tj tiled attention with running softmax rescaling; never
// materializes an N x N intermediate.
Mat flash_attention(const AttentionProblem& p, TileConfig cfg,
                    FlashStats* stats = nullptr);

// N^2 * (4d + 5)
std::uint64_t attention_flops(std::uint64_t N, std::uint64_t d);

AttentionProblem random_problem(std::size_t N, std::size_t d,
                                std::uint64_t seed, float lo = -3.0f,
                                float hi = 3.0f);

}  // namespace flatpar::attn
