#include "flatpar/nbody.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace flatpar::nbody {

void BodySystem::validate() const {
  const std::size_t n = mass.size();
  if (pos_x.size() != n || pos_y.size() != n || pos_z.size() != n ||
      vel_x.size() != n || vel_y.size() != n || vel_z.size() != n)
    throw std::invalid_argument("BodySystem: array length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (mass[i] < 0.0)
      throw std::invalid_argument("BodySystem: negative mass");
}

Vec3 accel(Vec3 p_i, Vec3 p_j, double m_j, double eps) {
  const Vec3 r = p_j - p_i;
  const double rsqr = r.dot(r) + eps;
  const double inv_dist = 1.0 / std::sqrt(rsqr);
  const double inv_dist3 = inv_dist * inv_dist * inv_dist;
  return (m_j * inv_dist3) * r;
}

ParArray<Vec3> calc_accels(const BodySystem& sys, double eps) {
  const std::size_t n = sys.size();
  const auto vecadd = make_monoid(
      [](Vec3 a, Vec3 b) { return a + b; }, Vec3{}, true);
  return tabulate(n, [&](std::size_t i) {
    const Vec3 p_i = sys.pos(i);
    return reduce_index(
        n,
        [&](std::size_t j) { return accel(p_i, sys.pos(j), sys.mass[j], eps); },
        vecadd);
  });
}

BodySystem step(const BodySystem& sys, const SimParams& params) {
  const auto accels = calc_accels(sys, params.epsilon);
  const double dt = params.dt;

  auto axpy = [dt](const ParArray<double>& x, auto&& y_at) {
    return tabulate(x.size(),
                    [&](std::size_t i) { return x[i] + dt * y_at(i); });
  };

  BodySystem out;
  out.vel_x = axpy(sys.vel_x, [&](std::size_t i) { return accels[i].x; });
  out.vel_y = axpy(sys.vel_y, [&](std::size_t i) { return accels[i].y; });
  out.vel_z = axpy(sys.vel_z, [&](std::size_t i) { return accels[i].z; });
  const BodySystem& vsrc = params.position_uses_new_velocity ? out : sys;
  out.pos_x = axpy(sys.pos_x, [&](std::size_t i) { return vsrc.vel_x[i]; });
  out.pos_y = axpy(sys.pos_y, [&](std::size_t i) { return vsrc.vel_y[i]; });
  out.pos_z = axpy(sys.pos_z, [&](std::size_t i) { return vsrc.vel_z[i]; });
  out.mass = sys.mass;
  return out;
}

BodySystem simulate(const BodySystem& sys, const SimParams& params) {
  BodySystem cur = sys;
  for (std::size_t s = 0; s < params.steps; ++s) cur = step(cur, params);
  return cur;
}

std::uint64_t nbody_flops(std::uint64_t n, std::uint64_t t) {
  return (19 * n * n + 12 * n) * t;
}

BodySystem random_system(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> px(n), py(n), pz(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = unit(rng);
    py[i] = unit(rng);
    pz[i] = unit(rng);
  }
  BodySystem sys;
  sys.pos_x = ParArray<double>(std::move(px));
  sys.pos_y = ParArray<double>(std::move(py));
  sys.pos_z = ParArray<double>(std::move(pz));
  sys.vel_x = replicate(n, 0.0);
  sys.vel_y = replicate(n, 0.0);
  sys.vel_z = replicate(n, 0.0);
  sys.mass = replicate(n, 1.0);
  return sys;
}

}  // namespace flatpar::nbody
