#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flatpar::bench {

enum class BenchmarkId { nbody, mg, quickhull, attention };
enum class PointGen { rectangle, disk, quadratic };

std::string to_string(BenchmarkId id);
std::optional<BenchmarkId> parse_benchmark(const std::string& name);
std::string to_string(PointGen g);
std::optional<PointGen> parse_generator(const std::string& name);

struct BenchSpec {
  BenchmarkId benchmark = BenchmarkId::nbody;

  // nbody
  std::size_t n = 1000;
  std::size_t t = 10;
  // mg
  std::size_t side = 32;
  std::size_t iters = 4;
  std::string weights_path;  // empty: built-in defaults (same as data file)
  // quickhull
  PointGen generator = PointGen::rectangle;
  std::size_t points = 100000;
  // attention
  std::size_t N = 512;
  std::size_t d = 64;
  std::size_t Ti = 64;
  std::size_t Tj = 64;

  std::uint64_t seed = 42;
  int threads = 0;  // 0 = FLATPAR_THREADS env or hardware default

  // Measurement protocol: warmup runs are discarded; measured runs continue
  // past min_runs until the relative stddev target is met or max_runs is
  // reached.
  int warmups = 5;
  int min_runs = 10;
  int max_runs = 50;
  double stddev_target = 0.03;

  void validate() const;  // throws std::invalid_argument
  std::string params_string() const;
  bool reports_gflops() const { return benchmark != BenchmarkId::quickhull; }
  std::uint64_t flops() const;
};

struct BenchReport {
  std::string benchmark;
  std::string params;
  std::uint64_t seed = 0;
  int threads = 0;
  int warmups = 0;
  std::vector<double> times_s;  // every measured run, auditable
  double mean_s = 0.0;
  double stddev_rel = 0.0;
  bool stddev_target_met = false;
  bool has_flops = false;
  std::uint64_t flops = 0;
  double gflops = 0.0;
  std::uint64_t output_checksum = 0;
  std::string timestamp;

  std::size_t runs() const { return times_s.size(); }
};

// Generates the input (untimed), performs the warmup/measure protocol and
// returns the report. Thread configuration from the spec is applied first.
BenchReport run_bench(const BenchSpec& spec);

// Module-specific oracle at reduced size where feasible, invariant-only
// checks otherwise. Never part of the timed region.
bool verify(const BenchSpec& spec, std::string* detail = nullptr);

void emit_json(const BenchReport& report, std::ostream& out);
void emit_csv(const BenchReport& report, std::ostream& out);

// Named parameter presets, e.g. "paper-1" or "smoke".
std::optional<BenchSpec> preset(BenchmarkId id, const std::string& name);
std::vector<std::string> preset_names(BenchmarkId id);

}  // namespace flatpar::bench
