#include "flatpar/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flatpar/attention.hpp"
#include "flatpar/multigrid.hpp"
#include "flatpar/nbody.hpp"
#include "flatpar/pool.hpp"
#include "flatpar/quickhull.hpp"

namespace flatpar::bench {

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  template <typename T>
  void values(const std::vector<T>& v) {
    bytes(v.data(), v.size() * sizeof(T));
  }
};

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

mg::MgOperators mg_operators(const BenchSpec& spec) {
  if (spec.weights_path.empty()) return {};
  return mg::load_operators(spec.weights_path);
}

// Timed computation plus an untimed checksum of the last output. Input
// generation happens before make_kernel returns.
struct Kernel {
  std::function<void()> run;
  std::function<std::uint64_t()> checksum;
};

Kernel make_kernel(const BenchSpec& spec) {
  switch (spec.benchmark) {
    case BenchmarkId::nbody: {
      auto sys = nbody::random_system(spec.n, spec.seed);
      nbody::SimParams params{.dt = 0.01, .steps = spec.t};
      auto out = std::make_shared<nbody::BodySystem>();
      return {[sys = std::move(sys), params, out] {
                *out = nbody::simulate(sys, params);
              },
              [out] {
                Fnv1a f;
                f.values(out->pos_x.values());
                f.values(out->pos_y.values());
                f.values(out->pos_z.values());
                f.values(out->vel_x.values());
                f.values(out->vel_y.values());
                f.values(out->vel_z.values());
                return f.h;
              }};
    }
    case BenchmarkId::mg: {
      auto v = mg::random_grid(spec.side, spec.seed);
      auto ops = mg_operators(spec);
      auto out = std::make_shared<std::pair<mg::Grid3, double>>();
      return {[v = std::move(v), ops, iters = spec.iters, out] {
                *out = mg::mg_solve(v, iters, ops);
              },
              [out] {
                Fnv1a f;
                f.values(out->first.values.values());
                f.bytes(&out->second, sizeof(double));
                return f.h;
              }};
    }
    case BenchmarkId::quickhull: {
      ParArray<qh::Point2> pts;
      switch (spec.generator) {
        case PointGen::rectangle:
          pts = qh::gen_rectangle(spec.points, spec.seed);
          break;
        case PointGen::disk:
          pts = qh::gen_disk(spec.points, spec.seed);
          break;
        case PointGen::quadratic:
          pts = qh::gen_quadratic(spec.points, spec.seed);
          break;
      }
      auto out = std::make_shared<ParArray<qh::Point2>>();
      return {[pts = std::move(pts), out] { *out = qh::hull(pts); },
              [out] {
                Fnv1a f;
                f.values(out->values());
                return f.h;
              }};
    }
    case BenchmarkId::attention: {
      auto p = attn::random_problem(spec.N, spec.d, spec.seed);
      attn::TileConfig cfg{spec.Ti, spec.Tj};
      auto out = std::make_shared<attn::Mat>();
      return {[p = std::move(p), cfg, out] {
                *out = attn::flash_attention(p, cfg);
              },
              [out] {
                Fnv1a f;
                f.values(out->a);
                return f.h;
              }};
    }
  }
  throw std::invalid_argument("unknown benchmark");
}

}  // namespace

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::nbody: return "nbody";
    case BenchmarkId::mg: return "mg";
    case BenchmarkId::quickhull: return "quickhull";
    case BenchmarkId::attention: return "attention";
  }
  return "?";
}

std::optional<BenchmarkId> parse_benchmark(const std::string& name) {
  if (name == "nbody") return BenchmarkId::nbody;
  if (name == "mg") return BenchmarkId::mg;
  if (name == "quickhull") return BenchmarkId::quickhull;
  if (name == "attention") return BenchmarkId::attention;
  return std::nullopt;
}

std::string to_string(PointGen g) {
  switch (g) {
    case PointGen::rectangle: return "rectangle";
    case PointGen::disk: return "disk";
    case PointGen::quadratic: return "quadratic";
  }
  return "?";
}

std::optional<PointGen> parse_generator(const std::string& name) {
  if (name == "rectangle") return PointGen::rectangle;
  if (name == "disk") return PointGen::disk;
  if (name == "quadratic") return PointGen::quadratic;
  return std::nullopt;
}

void BenchSpec::validate() const {
  if (warmups < 0 || min_runs < 1 || max_runs < min_runs)
    throw std::invalid_argument("spec: bad run counts");
  switch (benchmark) {
    case BenchmarkId::nbody:
      if (n < 1) throw std::invalid_argument("nbody: n must be >= 1");
      break;
    case BenchmarkId::mg:
      if (!power_of_two(side) || side < 2)
        throw std::invalid_argument("mg: side must be a power of two >= 2");
      break;
    case BenchmarkId::quickhull:
      if (points < 2)
        throw std::invalid_argument("quickhull: need at least 2 points");
      break;
    case BenchmarkId::attention:
      if (d < 1) throw std::invalid_argument("attention: d must be >= 1");
      if (Ti == 0 || Tj == 0 || N % Ti != 0 || N % Tj != 0)
        throw std::invalid_argument("attention: tiles must divide N");
      break;
  }
}

std::string BenchSpec::params_string() const {
  std::ostringstream os;
  switch (benchmark) {
    case BenchmarkId::nbody:
      os << "n=" << n << ";t=" << t;
      break;
    case BenchmarkId::mg:
      os << "side=" << side << ";iters=" << iters;
      break;
    case BenchmarkId::quickhull:
      os << "generator=" << to_string(generator) << ";n=" << points;
      break;
    case BenchmarkId::attention:
      os << "N=" << N << ";d=" << d << ";Ti=" << Ti << ";Tj=" << Tj;
      break;
  }
  return os.str();
}

std::uint64_t BenchSpec::flops() const {
  switch (benchmark) {
    case BenchmarkId::nbody: return nbody::nbody_flops(n, t);
    case BenchmarkId::mg: return mg::mg_flops(side, iters);
    case BenchmarkId::attention: return attn::attention_flops(N, d);
    case BenchmarkId::quickhull: break;  // runtime-reported benchmark
  }
  return 0;
}

BenchReport run_bench(const BenchSpec& spec) {
  spec.validate();
  set_thread_count(spec.threads);

  auto kernel = make_kernel(spec);

  for (int i = 0; i < spec.warmups; ++i) kernel.run();

  BenchReport report;
  using clock = std::chrono::steady_clock;
  while (static_cast<int>(report.times_s.size()) < spec.max_runs) {
    const auto t0 = clock::now();
    kernel.run();
    const auto t1 = clock::now();
    report.times_s.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (static_cast<int>(report.times_s.size()) < spec.min_runs) continue;
    double sum = 0.0;
    for (double x : report.times_s) sum += x;
    const double mean = sum / static_cast<double>(report.times_s.size());
    double var = 0.0;
    for (double x : report.times_s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(report.times_s.size() - 1);
    report.mean_s = mean;
    report.stddev_rel = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    if (report.stddev_rel < spec.stddev_target) break;
  }
  report.stddev_target_met = report.stddev_rel < spec.stddev_target;

  report.benchmark = to_string(spec.benchmark);
  report.params = spec.params_string();
  report.seed = spec.seed;
  report.threads = thread_count();
  report.warmups = spec.warmups;
  report.output_checksum = kernel.checksum();
  report.timestamp = utc_timestamp();
  if (spec.reports_gflops()) {
    report.has_flops = true;
    report.flops = spec.flops();
    report.gflops =
        static_cast<double>(report.flops) / report.mean_s / 1e9;
  }
  return report;
}

void emit_json(const BenchReport& r, std::ostream& out) {
  nlohmann::json j;
  j["benchmark"] = r.benchmark;
  j["params"] = r.params;
  j["seed"] = r.seed;
  j["threads"] = r.threads;
  j["warmups"] = r.warmups;
  j["runs"] = r.runs();
  j["times_s"] = r.times_s;
  j["mean_s"] = r.mean_s;
  j["stddev_rel"] = r.stddev_rel;
  j["stddev_target_met"] = r.stddev_target_met;
  if (r.has_flops) {
    j["flops"] = r.flops;
    j["gflops"] = r.gflops;
  }
  j["output_checksum"] = r.output_checksum;
  j["timestamp"] = r.timestamp;
  out << j.dump(2) << '\n';
}

void emit_csv(const BenchReport& r, std::ostream& out) {
  out << "benchmark,params,seed,threads,runs,mean_s,stddev_rel,flops,gflops\n";
  out << r.benchmark << ',' << r.params << ',' << r.seed << ',' << r.threads
      << ',' << r.runs() << ',' << r.mean_s << ',' << r.stddev_rel << ',';
  if (r.has_flops)
    out << r.flops << ',' << r.gflops;
  else
    out << ',';
  out << '\n';
}

namespace {

// Sequential N-body reference sharing the fixed accumulation tree.
nbody::BodySystem nbody_reference(const nbody::BodySystem& sys,
                                  const nbody::SimParams& params) {
  using nbody::Vec3;
  const std::size_t n = sys.size();
  nbody::BodySystem cur = sys;
  for (std::size_t s = 0; s < params.steps; ++s) {
    std::vector<Vec3> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 pi = cur.pos(i);
      Vec3 total{};
      for (std::size_t lo = 0; lo < n; lo += kReduceChunk) {
        const std::size_t hi = std::min(lo + kReduceChunk, n);
        Vec3 part{};
        for (std::size_t j = lo; j < hi; ++j)
          part = part + nbody::accel(pi, cur.pos(j), cur.mass[j],
                                     params.epsilon);
        total = total + part;
      }
      acc[i] = total;
    }
    std::vector<double> px(n), py(n), pz(n), vx(n), vy(n), vz(n);
    for (std::size_t i = 0; i < n; ++i) {
      vx[i] = cur.vel_x[i] + params.dt * acc[i].x;
      vy[i] = cur.vel_y[i] + params.dt * acc[i].y;
      vz[i] = cur.vel_z[i] + params.dt * acc[i].z;
      px[i] = cur.pos_x[i] + params.dt * cur.vel_x[i];
      py[i] = cur.pos_y[i] + params.dt * cur.vel_y[i];
      pz[i] = cur.pos_z[i] + params.dt * cur.vel_z[i];
    }
    cur.pos_x = ParArray<double>(std::move(px));
    cur.pos_y = ParArray<double>(std::move(py));
    cur.pos_z = ParArray<double>(std::move(pz));
    cur.vel_x = ParArray<double>(std::move(vx));
    cur.vel_y = ParArray<double>(std::move(vy));
    cur.vel_z = ParArray<double>(std::move(vz));
  }
  return cur;
}

bool verify_nbody(const BenchSpec& spec, std::string* detail) {
  const nbody::SimParams params{.dt = 0.01,
                                .steps = std::min<std::size_t>(spec.t, 5)};
  if (spec.n <= 1024) {
    const auto sys = nbody::random_system(spec.n, spec.seed);
    const auto got = nbody::simulate(sys, params);
    const auto want = nbody_reference(sys, params);
    const bool ok = got.pos_x == want.pos_x && got.pos_y == want.pos_y &&
                    got.pos_z == want.pos_z && got.vel_x == want.vel_x &&
                    got.vel_y == want.vel_y && got.vel_z == want.vel_z;
    if (detail)
      *detail = ok ? "nbody: matches sequential oracle bit-exactly"
                   : "nbody: mismatch against sequential oracle";
    return ok;
  }
  // Invariant-only: momentum drift of one step.
  const auto sys = nbody::random_system(spec.n, spec.seed);
  const auto next = nbody::step(sys, {.dt = 0.01, .steps = 1});
  nbody::Vec3 p0{}, p1{};
  double scale = 0.0;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    p0 = p0 + sys.mass[i] * sys.vel(i);
    p1 = p1 + next.mass[i] * next.vel(i);
    scale += next.mass[i] * std::sqrt(next.vel(i).dot(next.vel(i)));
  }
  const nbody::Vec3 drift = p1 - p0;
  const double mag = std::sqrt(drift.dot(drift));
  const bool ok = mag <= 1e-9 * std::max(scale, 1.0);
  if (detail)
    *detail = ok ? "nbody: momentum drift within bound"
                 : "nbody: momentum drift too large";
  return ok;
}

bool verify_mg(const BenchSpec& spec, std::string* detail) {
  const auto ops = mg_operators(spec);
  if (spec.side <= 16) {
    const auto v = mg::random_grid(spec.side, spec.seed);
    const std::size_t t = std::min<std::size_t>(spec.iters, 2);
    const auto [u, norm] = mg::mg_solve(v, t, ops);
    const auto [ur, norm_ref] = mg::mg_solve_reference(v, t, ops);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      const double denom = std::max(std::abs(ur.values[i]), 1e-30);
      max_rel = std::max(max_rel,
                         std::abs(u.values[i] - ur.values[i]) / denom);
    }
    const bool ok = max_rel <= 1e-11;
    if (detail) {
      std::ostringstream os;
      os << "mg: max relative error vs naive-stencil oracle " << max_rel;
      *detail = os.str();
    }
    return ok;
  }
  const auto v = mg::random_grid(spec.side, spec.seed);
  const auto [u, norm] = mg::mg_solve(v, 1, ops);
  const bool ok = norm < mg::l2_norm(v);
  if (detail)
    *detail = ok ? "mg: one V-cycle reduced the residual norm"
                 : "mg: residual norm did not decrease";
  return ok;
}

bool verify_quickhull(const BenchSpec& spec, std::string* detail) {
  ParArray<qh::Point2> pts;
  switch (spec.generator) {
    case PointGen::rectangle: pts = qh::gen_rectangle(spec.points, spec.seed); break;
    case PointGen::disk: pts = qh::gen_disk(spec.points, spec.seed); break;
    case PointGen::quadratic: pts = qh::gen_quadratic(spec.points, spec.seed); break;
  }
  const auto h = qh::hull(pts);
  if (spec.points <= 10000) {
    const auto ref = qh::brute_force_hull(pts);
    const bool ok = h == ref;
    if (detail)
      *detail = ok ? "quickhull: matches gift-wrapping oracle"
                   : "quickhull: differs from gift-wrapping oracle";
    return ok;
  }
  // Invariant-only: containment of every input point.
  double scale = 0.0;
  for (const auto& p : pts)
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = -1e-12 * std::max(scale * scale, 1.0);
  for (const auto& p : pts)
    for (std::size_t k = 0; k < h.size(); ++k) {
      const auto& a = h[k];
      const auto& b = h[(k + 1) % h.size()];
      if (qh::cross(a, b, p) < tol) {
        if (detail) *detail = "quickhull: point outside hull";
        return false;
      }
    }
  if (detail) *detail = "quickhull: all points inside hull";
  return true;
}

bool verify_attention(const BenchSpec& spec, std::string* detail) {
  const auto p = attn::random_problem(spec.N, spec.d, spec.seed);
  const auto flash = attn::flash_attention(p, {spec.Ti, spec.Tj});
  if (spec.N <= 2048) {
    const auto standard = attn::standard_attention(p);
    float max_abs = 0.0f;
    for (std::size_t i = 0; i < flash.a.size(); ++i)
      max_abs = std::max(max_abs, std::abs(flash.a[i] - standard.a[i]));
    const bool ok = max_abs <= 1e-3f;
    if (detail) {
      std::ostringstream os;
      os << "attention: max abs error vs standard path " << max_abs;
      *detail = os.str();
    }
    return ok;
  }
  // Invariant-only: output independent of the column tile.
  const auto other = attn::flash_attention(p, {spec.Ti, spec.Ti});
  float max_abs = 0.0f;
  for (std::size_t i = 0; i < flash.a.size(); ++i)
    max_abs = std::max(max_abs, std::abs(flash.a[i] - other.a[i]));
  const bool ok = max_abs <= 2e-5f;
  if (detail) {
    std::ostringstream os;
    os << "attention: tile-sweep max abs difference " << max_abs;
    *detail = os.str();
  }
  return ok;
}

}  // namespace

bool verify(const BenchSpec& spec, std::string* detail) {
  spec.validate();
  set_thread_count(spec.threads);
  switch (spec.benchmark) {
    case BenchmarkId::nbody: return verify_nbody(spec, detail);
    case BenchmarkId::mg: return verify_mg(spec, detail);
    case BenchmarkId::quickhull: return verify_quickhull(spec, detail);
    case BenchmarkId::attention: return verify_attention(spec, detail);
  }
  return false;
}

std::optional<BenchSpec> preset(BenchmarkId id, const std::string& name) {
  BenchSpec s;
  s.benchmark = id;
  switch (id) {
    case BenchmarkId::nbody:
      if (name == "paper-1") { s.n = 1000; s.t = 100000; return s; }
      if (name == "paper-2") { s.n = 10000; s.t = 1000; return s; }
      if (name == "paper-3") { s.n = 100000; s.t = 10; return s; }
      if (name == "smoke") { s.n = 512; s.t = 3; return s; }
      break;
    case BenchmarkId::mg:
      if (name == "class-a") { s.side = 256; s.iters = 4; return s; }
      if (name == "class-b") { s.side = 256; s.iters = 20; return s; }
      if (name == "class-c") { s.side = 512; s.iters = 20; return s; }
      if (name == "smoke") { s.side = 32; s.iters = 4; return s; }
      break;
    case BenchmarkId::quickhull:
      if (name == "paper-rectangle") { s.generator = PointGen::rectangle; s.points = 100000000; return s; }
      if (name == "paper-disk") { s.generator = PointGen::disk; s.points = 100000000; return s; }
      if (name == "paper-quadratic") { s.generator = PointGen::quadratic; s.points = 100000000; return s; }
      if (name == "smoke") { s.generator = PointGen::rectangle; s.points = 100000; return s; }
      break;
    case BenchmarkId::attention:
      if (name == "paper-1") { s.d = 64; s.N = 16384; return s; }
      if (name == "paper-2") { s.d = 64; s.N = 32768; return s; }
      if (name == "paper-3") { s.d = 128; s.N = 8192; return s; }
      if (name == "paper-4") { s.d = 128; s.N = 16384; return s; }
      if (name == "smoke") { s.d = 64; s.N = 512; return s; }
      break;
  }
  return std::nullopt;
}

std::vector<std::string> preset_names(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::nbody: return {"paper-1", "paper-2", "paper-3", "smoke"};
    case BenchmarkId::mg: return {"class-a", "class-b", "class-c", "smoke"};
    case BenchmarkId::quickhull:
      return {"paper-rectangle", "paper-disk", "paper-quadratic", "smoke"};
    case BenchmarkId::attention:
      return {"paper-1", "paper-2", "paper-3", "paper-4", "smoke"};
  }
  return {};
}

}  // namespace flatpar::bench
