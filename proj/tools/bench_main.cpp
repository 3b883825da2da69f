// Command-line harness: dataset generation, warmup/measurement protocol,
// flop-rate reporting and machine-readable result emission.
//
// Exit codes: 0 success, 2 invalid spec, 3 verification failure.

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "flatpar/bench.hpp"

namespace {

using flatpar::bench::BenchSpec;
using flatpar::bench::BenchmarkId;

struct CliArgs {
  std::string benchmark;
  std::string preset;
  std::string format = "json";
  std::string out_path;
  bool do_verify = false;

  BenchSpec spec;
  std::string generator = "rectangle";
};

void add_spec_options(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("benchmark", args.benchmark,
                  "nbody | mg | quickhull | attention")
      ->required();
  cmd->add_option("--preset", args.preset,
                  "named parameter preset (e.g. paper-1, smoke)");
  cmd->add_option("--seed", args.spec.seed, "input generator seed");
  cmd->add_option("--threads", args.spec.threads,
                  "worker threads (0 = FLATPAR_THREADS env or hardware)");
  cmd->add_option("--warmups", args.spec.warmups, "warmup runs");
  cmd->add_option("--min-runs", args.spec.min_runs, "minimum measured runs");
  cmd->add_option("--max-runs", args.spec.max_runs, "maximum measured runs");
  // nbody
  cmd->add_option("-n,--n", args.spec.n, "nbody: body count");
  cmd->add_option("-t,--steps", args.spec.t, "nbody: time steps");
  // mg
  cmd->add_option("--side", args.spec.side, "mg: grid side (power of two)");
  cmd->add_option("--iters", args.spec.iters, "mg: V-cycle iterations");
  cmd->add_option("--weights", args.spec.weights_path,
                  "mg: stencil weights file");
  // quickhull
  cmd->add_option("--generator", args.generator,
                  "quickhull: rectangle | disk | quadratic");
  cmd->add_option("--points", args.spec.points, "quickhull: point count");
  // attention
  cmd->add_option("-N,--seq-len", args.spec.N, "attention: sequence length");
  cmd->add_option("-d,--head-dim", args.spec.d, "attention: head dimension");
  cmd->add_option("--ti", args.spec.Ti, "attention: row tile");
  cmd->add_option("--tj", args.spec.Tj, "attention: column tile");
}

// Builds the final spec; preset values are overridden by explicit flags.
BenchSpec resolve_spec(const CLI::App* cmd, const CliArgs& args) {
  auto id = flatpar::bench::parse_benchmark(args.benchmark);
  if (!id) throw std::invalid_argument("unknown benchmark: " + args.benchmark);

  BenchSpec spec;
  if (!args.preset.empty()) {
    auto p = flatpar::bench::preset(*id, args.preset);
    if (!p)
      throw std::invalid_argument("unknown preset for " + args.benchmark +
                                  ": " + args.preset);
    spec = *p;
  } else {
    spec = args.spec;
    spec.benchmark = *id;
  }
  auto gen = flatpar::bench::parse_generator(args.generator);
  if (!gen) throw std::invalid_argument("unknown generator: " + args.generator);
  spec.generator = *gen;

  if (!args.preset.empty()) {
    auto take = [&](const char* flag, auto member) {
      if (cmd->count(flag)) spec.*member = args.spec.*member;
    };
    take("--seed", &BenchSpec::seed);
    take("--threads", &BenchSpec::threads);
    take("--warmups", &BenchSpec::warmups);
    take("--min-runs", &BenchSpec::min_runs);
    take("--max-runs", &BenchSpec::max_runs);
    take("--n", &BenchSpec::n);
    take("--steps", &BenchSpec::t);
    take("--side", &BenchSpec::side);
    take("--iters", &BenchSpec::iters);
    take("--weights", &BenchSpec::weights_path);
    take("--points", &BenchSpec::points);
    take("--seq-len", &BenchSpec::N);
    take("--head-dim", &BenchSpec::d);
    take("--ti", &BenchSpec::Ti);
    take("--tj", &BenchSpec::Tj);
  }
  spec.validate();
  return spec;
}

void emit(const flatpar::bench::BenchReport& report, const CliArgs& args) {
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty()) {
    file.open(args.out_path);
    if (!file)
      throw std::runtime_error("cannot open output file: " + args.out_path);
    out = &file;
  }
  if (args.format == "json")
    flatpar::bench::emit_json(report, *out);
  else if (args.format == "csv")
    flatpar::bench::emit_csv(report, *out);
  else
    throw std::invalid_argument("unknown format: " + args.format);
  if (!args.out_path.empty() && !file)
    throw std::runtime_error("failed writing output file: " + args.out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatpar benchmark harness"};
  app.require_subcommand(1);

  CliArgs run_args, verify_args;
  CLI::App* run = app.add_subcommand("run", "measure a benchmark");
  add_spec_options(run, run_args);
  run->add_option("--format", run_args.format, "json | csv");
  run->add_option("--out", run_args.out_path, "write the report to a file");
  run->add_flag("--verify", run_args.do_verify,
                "run the oracle/invariant checks after measuring");

  CLI::App* verify = app.add_subcommand("verify", "oracle/invariant checks");
  add_spec_options(verify, verify_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const BenchSpec spec = resolve_spec(run, run_args);
      const auto report = flatpar::bench::run_bench(spec);
      emit(report, run_args);
      if (run_args.do_verify) {
        std::string detail;
        if (!flatpar::bench::verify(spec, &detail)) {
          std::cerr << "verification FAILED: " << detail << '\n';
          return 3;
        }
        std::cerr << "verification ok: " << detail << '\n';
      }
    } else {
      const BenchSpec spec = resolve_spec(verify, verify_args);
      std::string detail;
      if (!flatpar::bench::verify(spec, &detail)) {
        std::cerr << "verification FAILED: " << detail << '\n';
        return 3;
      }
      std::cout << "verification ok: " << detail << '\n';
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
