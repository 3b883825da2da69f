#include "flatpar/multigrid.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace flatpar::mg {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

Grid3 grid_sub(const Grid3& a, const Grid3& b) {
  return Grid3(a.n, map2(a.values, b.values,
                         [](double x, double y) { return x - y; }));
}

Grid3 grid_add(const Grid3& a, const Grid3& b) {
  return Grid3(a.n, map2(a.values, b.values,
                         [](double x, double y) { return x + y; }));
}

}  // namespace

Grid3::Grid3(std::size_t side, ParArray<double> v)
    : n(side), values(std::move(v)) {
  if (!is_power_of_two(n))
    throw std::invalid_argument("Grid3: side must be a power of two");
  if (values.size() != n * n * n)
    throw std::invalid_argument("Grid3: value count must be n^3");
}

Grid3 Grid3::zeros(std::size_t side) {
  return Grid3(side, replicate(side * side * side, 0.0));
}

MgOperators load_operators(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file: " + path);
  MgOperators ops;
  bool seen[4] = {false, false, false, false};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    Weights4 w;
    if (!(ls >> name >> w.ws[0] >> w.ws[1] >> w.ws[2] >> w.ws[3]))
      throw std::runtime_error("malformed weights line: " + line);
    std::string extra;
    if (ls >> extra)
      throw std::runtime_error("trailing tokens in weights line: " + line);
    int idx;
    if (name == "A") idx = 0;
    else if (name == "P") idx = 1;
    else if (name == "Q") idx = 2;
    else if (name == "S") idx = 3;
    else throw std::runtime_error("unknown weights name: " + name);
    if (seen[idx]) throw std::runtime_error("duplicate weights name: " + name);
    seen[idx] = true;
    (idx == 0 ? ops.weights_A
     : idx == 1 ? ops.weights_P
     : idx == 2 ? ops.weights_Q
                : ops.weights_S) = w;
  }
  for (int i = 0; i < 4; ++i)
    if (!seen[i]) throw std::runtime_error("weights file misses a vector");
  return ops;
}

Weights27 expand_weights(const Weights4& ws) {
  Weights27 out;
  for (int j1 = 0; j1 < 3; ++j1)
    for (int j2 = 0; j2 < 3; ++j2)
      for (int j3 = 0; j3 < 3; ++j3) {
        const int dist = std::abs(j1 - 1) + std::abs(j2 - 1) + std::abs(j3 - 1);
        out.w[j1 * 9 + j2 * 3 + j3] = ws.ws[dist];
      }
  return out;
}

Grid3 stencil27_naive(const Grid3& x, const Weights27& w) {
  const std::size_t n = x.n;
  auto values = tabulate_2d<double>(
      n * n, n, [&](std::size_t line, std::span<double> out) {
        const std::size_t i1 = line / n;
        const std::size_t i2 = line % n;
        for (std::size_t i3 = 0; i3 < n; ++i3) {
          double acc = 0.0;
          for (int j1 = 0; j1 < 3; ++j1)
            for (int j2 = 0; j2 < 3; ++j2)
              for (int j3 = 0; j3 < 3; ++j3) {
                const std::size_t k1 =
                    detail::wrap(static_cast<std::ptrdiff_t>(i1) + j1 - 1, n);
                const std::size_t k2 =
                    detail::wrap(static_cast<std::ptrdiff_t>(i2) + j2 - 1, n);
                const std::size_t k3 =
                    detail::wrap(static_cast<std::ptrdiff_t>(i3) + j3 - 1, n);
                acc += w.w[j1 * 9 + j2 * 3 + j3] * x.at(k1, k2, k3);
              }
          out[i3] = acc;
        }
      });
  return Grid3(n, std::move(values));
}

Grid3 relax_grid(const Grid3& x, const Weights4& w) {
  return relax_opt(
      x.n,
      [&x](std::size_t i, std::size_t j, std::size_t k) {
        return x.at(i, j, k);
      },
      w);
}

Grid3 relax_eighth(const Grid3& coarse, const Weights4& w) {
  const std::size_t n = 2 * coarse.n;
  return relax_opt(
      n,
      [&coarse](std::size_t i, std::size_t j, std::size_t k) {
        if ((i % 2) + (j % 2) + (k % 2) == 3)
          return coarse.at(i / 2, j / 2, k / 2);
        return 0.0;
      },
      w);
}

Grid3 f2c(const Grid3& fine) {
  if (fine.n % 2 != 0 || fine.n < 2)
    throw std::invalid_argument("f2c: side must be even");
  const std::size_t m = fine.n / 2;
  auto values = tabulate(m * m * m, [&](std::size_t idx) {
    const std::size_t i = idx / (m * m);
    const std::size_t j = (idx / m) % m;
    const std::size_t k = idx % m;
    return fine.at(2 * i + 1, 2 * j + 1, 2 * k + 1);
  });
  return Grid3(m, std::move(values));
}

Grid3 c2f(const Grid3& coarse) {
  const std::size_t m = coarse.n;
  const std::size_t n = 2 * m;
  auto values = tabulate(n * n * n, [&](std::size_t idx) {
    const std::size_t i = idx / (n * n);
    const std::size_t j = (idx / n) % n;
    const std::size_t k = idx % n;
    if ((i % 2) + (j % 2) + (k % 2) == 3)
      return coarse.at(i / 2, j / 2, k / 2);
    return 0.0;
  });
  return Grid3(n, std::move(values));
}

Grid3 vcycle(const Grid3& r, const MgOperators& ops) {
  if (r.n < 2) throw std::invalid_argument("vcycle: side must be >= 2");
  if (r.n == 2) return relax_grid(r, ops.weights_S);
  const Grid3 rs = relax_grid(f2c(r), ops.weights_P);
  const Grid3 zs = vcycle(rs, ops);
  const Grid3 z = relax_eighth(zs, ops.weights_Q);
  const Grid3 r2 = grid_sub(r, relax_grid(z, ops.weights_A));
  return grid_add(z, relax_grid(r2, ops.weights_S));
}

Grid3 vcycle_reference(const Grid3& r, const MgOperators& ops) {
  auto apply = [&](const Grid3& g, const Weights4& w) {
    return stencil27_naive(g, expand_weights(w));
  };
  if (r.n < 2) throw std::invalid_argument("vcycle: side must be >= 2");
  if (r.n == 2) return apply(r, ops.weights_S);
  const Grid3 rs = apply(f2c(r), ops.weights_P);
  const Grid3 zs = vcycle_reference(rs, ops);
  const Grid3 z = apply(c2f(zs), ops.weights_Q);
  const Grid3 r2 = grid_sub(r, apply(z, ops.weights_A));
  return grid_add(z, apply(r2, ops.weights_S));
}

namespace {

template <typename VCycle, typename Apply>
std::pair<Grid3, double> solve_with(const Grid3& v, std::size_t t,
                                    VCycle&& cycle, Apply&& apply_a) {
  Grid3 u = Grid3::zeros(v.n);
  for (std::size_t i = 0; i < t; ++i) {
    const Grid3 r = grid_sub(v, apply_a(u));
    u = grid_add(u, cycle(r));
  }
  const Grid3 r = grid_sub(v, apply_a(u));
  return {std::move(u), l2_norm(r)};
}

}  // namespace

std::pair<Grid3, double> mg_solve(const Grid3& v, std::size_t t,
                                  const MgOperators& ops) {
  return solve_with(
      v, t, [&](const Grid3& r) { return vcycle(r, ops); },
      [&](const Grid3& u) { return relax_grid(u, ops.weights_A); });
}

std::pair<Grid3, double> mg_solve_reference(const Grid3& v, std::size_t t,
                                            const MgOperators& ops) {
  return solve_with(
      v, t, [&](const Grid3& r) { return vcycle_reference(r, ops); },
      [&](const Grid3& u) {
        return stencil27_naive(u, expand_weights(ops.weights_A));
      });
}

double l2_norm(const Grid3& r) {
  const double sum = reduce_index(
      r.values.size(),
      [&](std::size_t i) { return r.values[i] * r.values[i]; },
      sum_monoid<double>());
  return std::sqrt(sum / static_cast<double>(r.values.size()));
}

std::uint64_t mg_flops(std::uint64_t n, std::uint64_t t) {
  return 58 * t * n * n * n;
}

Grid3 random_grid(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(side * side * side);
  for (auto& x : v) x = dist(rng);
  return Grid3(side, ParArray<double>(std::move(v)));
}

}  // namespace flatpar::mg
