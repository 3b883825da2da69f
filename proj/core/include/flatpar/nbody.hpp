#pragma once

#include <cstdint>

#include "flatpar/combinators.hpp"
#include "flatpar/par_array.hpp"

namespace flatpar::nbody {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(Vec3 a, Vec3 b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, Vec3 a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  bool operator==(const Vec3&) const = default;
};

// Structure-of-arrays particle state: seven equal-length double arrays.
struct BodySystem {
  ParArray<double> pos_x, pos_y, pos_z;
  ParArray<double> vel_x, vel_y, vel_z;
  ParArray<double> mass;

  std::size_t size() const { return mass.size(); }
  void validate() const;

  Vec3 pos(std::size_t i) const { return {pos_x[i], pos_y[i], pos_z[i]}; }
  Vec3 vel(std::size_t i) const { return {vel_x[i], vel_y[i], vel_z[i]}; }
};

struct SimParams {
  double dt = 0.01;
  std::size_t steps = 1;
  double epsilon = 1e-9;
  // Default updates positions with the pre-step velocity (both updates read
  // the same old snapshot). Setting this uses the freshly updated velocity
  // in the position update instead.
  bool position_uses_new_velocity = false;
};

// Acceleration contribution of body j on a body at p_i:
// m_j * (p_j - p_i) / (|p_j - p_i|^2 + eps)^{3/2}. The softening term is
// added un-squared to the squared distance.
Vec3 accel(Vec3 p_i, Vec3 p_j, double m_j, double eps);

// result[i] = sum over all j (self term included, contributing exactly
// zero) under the fixed reduction tree.
ParArray<Vec3> calc_accels(const BodySystem& sys, double eps);

BodySystem step(const BodySystem& sys, const SimParams& params);
BodySystem simulate(const BodySystem& sys, const SimParams& params);

// (19 n^2 + 12 n) * t
std::uint64_t nbody_flops(std::uint64_t n, std::uint64_t t);

// Uniform positions in the unit cube, zero velocities, unit masses.
BodySystem random_system(std::size_t n, std::uint64_t seed);

}  // namespace flatpar::nbody
