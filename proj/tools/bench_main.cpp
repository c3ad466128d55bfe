// Benchmark CLI: parameter sweeps over the matching algorithms with CSV
// and SVG plot output.
//
//   bench <benchmark> --min-param I --max-param I [--param-step I]
//         [--repetitions I] [--warmup I] [--algorithms "a, b, c"]
//         [--smoothen] [--seed I] [--out DIR] [benchmark-specific flags]

#include "joins/bench/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  using namespace joins;
  using namespace joins::bench;

  CLI::App app{"Join pattern matching benchmark harness"};
  app.name("bench");

  std::string benchmark;
  std::string algorithms = "while-lazy";
  HarnessConfig config;
  bool list_only = false;

  app.add_option("benchmark", benchmark, "Benchmark to run")->required(false);
  app.add_flag("--list", list_only, "List benchmarks and algorithms, then exit");
  app.add_option("--min-param", config.min_param, "Smallest main parameter");
  app.add_option("--max-param", config.max_param, "Largest main parameter");
  app.add_option("--param-step", config.param_step, "Main parameter step")
      ->default_val(1);
  app.add_option("--repetitions", config.repetitions,
                 "Timed repetitions per parameter value")
      ->default_val(1);
  app.add_option("--warmup", config.warmup,
                 "Untimed repetitions run before the benchmark")
      ->default_val(0);
  app.add_option("--algorithms", algorithms,
                 "Comma-separated matching algorithms to test");
  app.add_flag("--smoothen", config.smoothen,
               "Iterate repetitions before parameter values");
  app.add_option("--seed", config.bench.seed, "Noise generator seed")
      ->default_val(42);
  app.add_option("--out", config.out_dir, "Output directory")->default_val(".");
  app.add_option("--matches", config.bench.matches, "Matches per run")
      ->default_val(10);
  app.add_flag("--noise", config.bench.noise, "Interleave fresh-type noise (size)");
  app.add_option("--variant", config.bench.variant,
                 "size-with-guards variant: normal|noisy|non-satisfying")
      ->default_val("normal");
  app.add_flag("--heavy-guard", config.bench.heavy_guard,
               "Busy-wait inside the guard (simple-smart-house)");
  app.add_option("--heavy-guard-micros", config.bench.heavy_guard_micros,
                 "Busy-wait duration per guard evaluation")
      ->default_val(100);
  app.add_option("--bufferBound", config.bench.buffer_bound,
                 "Buffer capacity (bounded-buffer)")
      ->default_val(10);
  app.add_option("--count", config.bench.count,
                 "Items per producer/consumer lane (bounded-buffer)")
      ->default_val(50);

  bool min_given = false, max_given = false;
  app.callback([&] {
    min_given = app.count("--min-param") > 0;
    max_given = app.count("--max-param") > 0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (list_only) {
    std::cout << "benchmarks:";
    for (const auto& name : benchmark_names()) std::cout << ' ' << name;
    std::cout << "\nalgorithms:";
    for (AlgorithmId id : all_algorithms()) std::cout << ' ' << to_string(id);
    std::cout << "\n";
    return 0;
  }

  try {
    if (benchmark.empty()) {
      std::string names;
      for (const auto& n : benchmark_names()) names += " " + n;
      throw UsageError("no benchmark given; valid benchmarks:" + names);
    }
    config.benchmark = benchmark;
    config.algorithms = parse_algorithm_list(algorithms);
    if (config.algorithms.empty())
      throw UsageError("no algorithms given");

    const BenchmarkFactory* factory = find_benchmark(benchmark);
    if (factory) {
      if (!min_given) config.min_param = factory->default_min_param;
      if (!max_given) config.max_param = factory->default_max_param;
    }

    ResultsTable table = run_sweep(config);

    std::filesystem::create_directories(config.out_dir);
    const std::string csv_path = config.out_dir + "/" + benchmark + ".csv";
    const std::string svg_path = config.out_dir + "/" + benchmark + ".svg";
    write_csv_file(table, csv_path);
    render_plot_file(table, svg_path);
    std::cout << "wrote " << csv_path << " and " << svg_path << "\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
