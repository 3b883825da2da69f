#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flatpar/combinators.hpp"
#include "flatpar/par_array.hpp"

namespace flatpar::mg {

// Periodic n x n x n grid, row-major with the last index fastest.
struct Grid3 {
  std::size_t n = 0;
  ParArray<double> values;

  Grid3() = default;
  Grid3(std::size_t side, ParArray<double> v);

  double at(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return values[(i1 * n + i2) * n + i3];
  }
  static Grid3 zeros(std::size_t side);
};

struct Weights27 {
  // indexed by j1*9 + j2*3 + j3, (j1,j2,j3) in {0,1,2}^3
  std::array<double, 27> w{};
};

// Distinct stencil weights by number of non-zero offset axes:
// [center (1), face (6), edge (12), corner (8)].
struct Weights4 {
  std::array<double, 4> ws{};
};

struct MgOperators {
  Weights4 weights_A{{-8.0 / 3.0, 0.0, 1.0 / 6.0, 1.0 / 12.0}};
  Weights4 weights_P{{1.0 / 2.0, 1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0}};
  Weights4 weights_Q{{1.0, 1.0 / 2.0, 1.0 / 4.0, 1.0 / 8.0}};
  Weights4 weights_S{{-3.0 / 8.0, 1.0 / 32.0, -1.0 / 64.0, 0.0}};
};

// Parses a weights file: four lines "NAME w0 w1 w2 w3" with names A P Q S,
// each exactly once.
MgOperators load_operators(const std::string& path);

Weights27 expand_weights(const Weights4& ws);

Grid3 stencil27_naive(const Grid3& x, const Weights27& w);

// Optimized relaxation over an index function: per (i1,i2) line it builds
// the 4-neighbor plus-sum and diagonal-sum buffers over the fastest index
// and combines them with the four distinct weights.
template <typename At>
Grid3 relax_opt(std::size_t n, At&& at, const Weights4& w);

// relax_opt over a materialized grid.
Grid3 relax_grid(const Grid3& x, const Weights4& w);
// Reads the coarse grid as if prolongated: odd positions carry the coarse
// values, everything else is zero. Fuses relax(c2f(coarse)).
Grid3 relax_eighth(const Grid3& coarse, const Weights4& w);

Grid3 f2c(const Grid3& fine);
Grid3 c2f(const Grid3& coarse);

Grid3 vcycle(const Grid3& r, const MgOperators& ops);

// Reference V-cycle evaluated entirely with the naive stencil and
// materialized grid transfers. Used by bench verify.
Grid3 vcycle_reference(const Grid3& r, const MgOperators& ops);

std::pair<Grid3, double> mg_solve(const Grid3& v, std::size_t t,
                                  const MgOperators& ops);
std::pair<Grid3, double> mg_solve_reference(const Grid3& v, std::size_t t,
                                            const MgOperators& ops);

// sqrt(sum r_i^2 / n^3)
double l2_norm(const Grid3& r);

// 58 * t * n^3
std::uint64_t mg_flops(std::uint64_t n, std::uint64_t t);

Grid3 random_grid(std::size_t side, std::uint64_t seed);

namespace detail {
inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  std::ptrdiff_t m = i % static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(m < 0 ? m + static_cast<std::ptrdiff_t>(n)
                                        : m);
}
}  // namespace detail

template <typename At>
Grid3 relax_opt(std::size_t n, At&& at, const Weights4& w) {
  const auto& ws = w.ws;
  auto values = tabulate_2d<double>(
      n * n, n, [&](std::size_t line, std::span<double> out) {
        const std::size_t i = line / n;
        const std::size_t j = line % n;
        const std::size_t im = detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, n);
        const std::size_t ip = detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, n);
        const std::size_t jm = detail::wrap(static_cast<std::ptrdiff_t>(j) - 1, n);
        const std::size_t jp = detail::wrap(static_cast<std::ptrdiff_t>(j) + 1, n);
        thread_local std::vector<double> u1s, u2s;
        u1s.resize(n);
        u2s.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          u1s[k] = at(i, jm, k) + at(i, jp, k) + at(im, j, k) + at(ip, j, k);
          u2s[k] = at(im, jm, k) + at(im, jp, k) + at(ip, jm, k) +
                   at(ip, jp, k);
        }
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t km =
              detail::wrap(static_cast<std::ptrdiff_t>(k) - 1, n);
          const std::size_t kp =
              detail::wrap(static_cast<std::ptrdiff_t>(k) + 1, n);
          out[k] = ws[0] * at(i, j, k) +
                   ws[1] * (u1s[k] + at(i, j, km) + at(i, j, kp)) +
                   ws[2] * (u2s[k] + u1s[km] + u1s[kp]) +
                   ws[3] * (u2s[km] + u2s[kp]);
        }
      });
  return Grid3(n, std::move(values));
}

}  // namespace flatpar::mg
