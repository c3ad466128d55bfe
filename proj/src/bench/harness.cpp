#include "joins/bench/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace joins::bench {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string joined_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

std::string all_algorithm_names() {
  std::vector<std::string> names;
  for (AlgorithmId id : all_algorithms()) names.emplace_back(to_string(id));
  return joined_names(names);
}

}  // namespace

double ResultsTable::average(std::size_t algo, std::size_t param) const {
  const auto& reps = times_ms[algo][param];
  if (reps.empty()) return 0.0;
  double sum = 0.0;
  for (double t : reps) sum += t;
  return sum / static_cast<double>(reps.size());
}

double ResultsTable::stddev(std::size_t algo, std::size_t param) const {
  const auto& reps = times_ms[algo][param];
  if (reps.size() < 2) return 0.0;
  const double avg = average(algo, param);
  double acc = 0.0;
  for (double t : reps) acc += (t - avg) * (t - avg);
  return std::sqrt(acc / static_cast<double>(reps.size() - 1));
}

std::vector<AlgorithmId> parse_algorithm_list(const std::string& csv) {
  std::vector<AlgorithmId> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = token.find_last_not_of(" \t");
    const std::string name = token.substr(first, last - first + 1);
    auto id = algorithm_from_string(name);
    if (!id)
      throw UsageError("unknown algorithm '" + name +
                       "'; valid algorithms: " + all_algorithm_names());
    out.push_back(*id);
  }
  return out;
}

ResultsTable run_sweep(const HarnessConfig& config,
                       std::vector<ScheduleEntry>* schedule_log,
                       std::vector<RunReport>* reports) {
  const BenchmarkFactory* factory = find_benchmark(config.benchmark);
  if (!factory)
    throw UsageError("unknown benchmark '" + config.benchmark +
                     "'; valid benchmarks: " + joined_names(benchmark_names()));
  if (config.min_param > config.max_param)
    throw UsageError("min-param must not exceed max-param");
  if (config.param_step < 1) throw UsageError("param-step must be >= 1");
  if (config.repetitions < 1) throw UsageError("repetitions must be >= 1");
  if (config.warmup < 0) throw UsageError("warmup must be >= 0");

  ResultsTable table;
  table.algorithms = config.algorithms;
  table.repetitions = config.repetitions;
  for (std::int64_t p = config.min_param; p <= config.max_param;
       p += config.param_step)
    table.params.push_back(p);
  table.times_ms.assign(table.algorithms.size(),
                        std::vector<std::vector<double>>(table.params.size()));

  for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
    const AlgorithmId algo = table.algorithms[a];
    auto benchmark = factory->make(algo, config.bench);
    if (!config.quiet)
      std::cout << "[" << config.benchmark << "] algorithm " << to_string(algo)
                << "\n";

    for (int w = 0; w < config.warmup; ++w) {
      auto prepared = benchmark->prepare(config.max_param);
      prepared->run();
      if (schedule_log)
        schedule_log->push_back(ScheduleEntry{algo, config.max_param, w, true});
    }

    auto timed_cell = [&](std::size_t p, int rep) {
      auto prepared = benchmark->prepare(table.params[p]);
      const auto t0 = std::chrono::steady_clock::now();
      prepared->run();
      const auto t1 = std::chrono::steady_clock::now();
      const double ms =
          std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 -
                                                                                 t0)
              .count();
      table.times_ms[a][p].push_back(ms);
      if (schedule_log)
        schedule_log->push_back(ScheduleEntry{algo, table.params[p], rep, false});
      if (reports) reports->push_back(prepared->report());
      if (!config.quiet)
        std::cout << "  param " << table.params[p] << " rep " << rep << ": "
                  << fixed3(ms) << " ms\n";
    };

    if (config.smoothen) {
      for (int rep = 0; rep < config.repetitions; ++rep)
        for (std::size_t p = 0; p < table.params.size(); ++p) timed_cell(p, rep);
    } else {
      for (std::size_t p = 0; p < table.params.size(); ++p)
        for (int rep = 0; rep < config.repetitions; ++rep) timed_cell(p, rep);
    }
  }
  return table;
}

void write_csv(const ResultsTable& table, std::ostream& out) {
  out << "main_param";
  for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
    const std::string name(to_string(table.algorithms[a]));
    for (int rep = 0; rep < table.repetitions; ++rep)
      out << ',' << name << ".rep" << (rep + 1);
    out << ',' << name << ".average," << name << ".stddev";
  }
  out << '\n';
  if (table.algorithms.empty()) return;

  for (std::size_t p = 0; p < table.params.size(); ++p) {
    out << table.params[p];
    for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
      for (int rep = 0; rep < table.repetitions; ++rep) {
        const auto& reps = table.times_ms[a][p];
        out << ','
            << fixed3(static_cast<std::size_t>(rep) < reps.size()
                          ? reps[static_cast<std::size_t>(rep)]
                          : 0.0);
      }
      out << ',' << fixed3(table.average(a, p)) << ',' << fixed3(table.stddev(a, p));
    }
    out << '\n';
  }
}

void write_csv_file(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open CSV output file: " + path);
  write_csv(table, out);
  if (!out) throw std::runtime_error("failed writing CSV output file: " + path);
}

void render_plot(const ResultsTable& table, std::ostream& out) {
  constexpr int kWidth = 860, kHeight = 520;
  constexpr int kLeft = 70, kRight = 220, kTop = 30, kBottom = 60;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;

  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                   "#bcbd22", "#17becf", "#393b79", "#637939"};

  double x_min = 0, x_max = 1, y_max = 1;
  if (!table.params.empty()) {
    x_min = static_cast<double>(table.params.front());
    x_max = static_cast<double>(table.params.back());
  }
  if (x_max <= x_min) x_max = x_min + 1;
  for (std::size_t a = 0; a < table.algorithms.size(); ++a)
    for (std::size_t p = 0; p < table.params.size(); ++p)
      y_max = std::max(y_max, table.average(a, p));

  auto x_at = [&](double v) {
    return kLeft + (v - x_min) / (x_max - x_min) * plot_w;
  };
  auto y_at = [&](double v) { return kTop + plot_h - v / y_max * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18
      << "\" text-anchor=\"middle\" font-size=\"13\">main parameter</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">average time (ms)</text>\n";
  out << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + plot_h + 4
      << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n";
  out << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << fixed3(y_max)
      << "</text>\n";
  if (!table.params.empty()) {
    out << "<text x=\"" << x_at(x_min) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << table.params.front()
        << "</text>\n";
    out << "<text x=\"" << x_at(x_max) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << table.params.back()
        << "</text>\n";
  }

  for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
    const char* color = kPalette[a % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t p = 0; p < table.params.size(); ++p)
      out << x_at(static_cast<double>(table.params[p])) << ','
          << y_at(table.average(a, p)) << ' ';
    out << "\"/>\n";
    for (std::size_t p = 0; p < table.params.size(); ++p)
      out << "<circle cx=\"" << x_at(static_cast<double>(table.params[p]))
          << "\" cy=\"" << y_at(table.average(a, p)) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    const int ly = kTop + 16 + static_cast<int>(a) * 18;
    out << "<rect x=\"" << kLeft + plot_w + 16 << "\" y=\"" << ly - 9
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kLeft + plot_w + 34 << "\" y=\"" << ly + 2
        << "\" font-size=\"12\">" << to_string(table.algorithms[a])
        << "</text>\n";
  }
  out << "</svg>\n";
}

void render_plot_file(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open plot output file: " + path);
  render_plot(table, out);
  if (!out) throw std::runtime_error("failed writing plot output file: " + path);
}

}  // namespace joins::bench
