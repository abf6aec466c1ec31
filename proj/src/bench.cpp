#include "temprel/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace temprel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string name = line.substr(colon + 1);
        const auto start = name.find_first_not_of(" \t");
        return start == std::string::npos ? name : name.substr(start);
      }
    }
  }
  return "unknown";
}

}  // namespace

BenchReport run_bench(const BiaffineModel<float>& model, const std::vector<RawInput>& raws,
                      const BenchOptions& options, const BenchSink& sink) {
  if (options.repetitions < 1) throw UsageError("bench repetitions must be positive");
  if (options.workers < 1) throw UsageError("bench workers must be positive");
  if (raws.empty()) throw DataError("bench corpus is empty");

  BenchReport report;
  report.cpu_model = read_cpu_model();
  report.hardware_threads = std::thread::hardware_concurrency();
  for (const auto& r : raws) report.sentences += static_cast<long>(r.sentences.size());

  for (int rep = 0; rep < options.repetitions; ++rep) {
    std::vector<WindowInstance> windows;
    std::vector<TemporalGraph> graphs;
    double window_s = 0, forward_s = 0, decode_s = 0;

    const auto rep_start = Clock::now();
    {
      const auto t0 = Clock::now();
      for (const auto& raw : raws) {
        auto doc_windows = make_raw_windows(raw, options.preprocess);
        for (auto& w : doc_windows) windows.push_back(std::move(w));
      }
      window_s = seconds_since(t0);
    }
    graphs.resize(windows.size());
    if (options.workers == 1) {
      for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto t0 = Clock::now();
        ScoreSet<float> scores = model.score(windows[i].tokens);
        const auto t1 = Clock::now();
        graphs[i] = decode(scores);
        forward_s += std::chrono::duration<double>(t1 - t0).count();
        decode_s += seconds_since(t1);
      }
    } else {
      // Stage totals aggregate busy time across threads.
      std::atomic<std::size_t> next{0};
      std::atomic<long> forward_ns{0}, decode_ns{0};
      std::vector<std::thread> pool;
      for (int t = 0; t < options.workers; ++t) {
        pool.emplace_back([&]() {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= windows.size()) return;
            const auto t0 = Clock::now();
            ScoreSet<float> scores = model.score(windows[i].tokens);
            const auto t1 = Clock::now();
            graphs[i] = decode(scores);
            const auto t2 = Clock::now();
            forward_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
            decode_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
          }
        });
      }
      for (auto& th : pool) th.join();
      forward_s = static_cast<double>(forward_ns.load()) * 1e-9;
      decode_s = static_cast<double>(decode_ns.load()) * 1e-9;
    }
    const double rep_seconds = seconds_since(rep_start);

    // Everything below is outside the measured region.
    report.windows = static_cast<long>(windows.size());
    report.window_seconds += window_s;
    report.forward_seconds += forward_s;
    report.decode_seconds += decode_s;
    report.sentences_per_sec.push_back(static_cast<double>(report.sentences) / rep_seconds);
    if (sink) sink(rep, graphs);
  }

  double sum = 0;
  for (double v : report.sentences_per_sec) sum += v;
  report.mean = sum / static_cast<double>(report.sentences_per_sec.size());
  if (report.sentences_per_sec.size() > 1) {
    double sq = 0;
    for (double v : report.sentences_per_sec) sq += (v - report.mean) * (v - report.mean);
    report.stddev = std::sqrt(sq / static_cast<double>(report.sentences_per_sec.size() - 1));
  }
  return report;
}

std::string format_bench(const BenchReport& report) {
  std::ostringstream out;
  out << "cpu: " << report.cpu_model << " (" << report.hardware_threads
      << " hardware threads)\n";
  out << "corpus: " << report.sentences << " sentences, " << report.windows << " windows\n";
  out << "repetitions: " << report.sentences_per_sec.size() << "\n";
  char line[160];
  for (std::size_t rep = 0; rep < report.sentences_per_sec.size(); ++rep) {
    std::snprintf(line, sizeof(line), "  rep %2zu: %10.2f sentences/sec\n", rep + 1,
                  report.sentences_per_sec[rep]);
    out << line;
  }
  std::snprintf(line, sizeof(line), "throughput: %.2f sentences/sec (stddev %.2f)\n",
                report.mean, report.stddev);
  out << line;
  std::snprintf(line, sizeof(line),
                "stage totals: window %.4fs, forward %.4fs, decode %.4fs\n",
                report.window_seconds, report.forward_seconds, report.decode_seconds);
  out << line;
  return out.str();
}

std::string bench_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["cpu_model"] = report.cpu_model;
  j["hardware_threads"] = report.hardware_threads;
  j["sentences"] = report.sentences;
  j["windows"] = report.windows;
  j["repetitions"] = report.sentences_per_sec.size();
  j["sentences_per_sec"] = report.sentences_per_sec;
  j["mean"] = report.mean;
  j["stddev"] = report.stddev;
  j["stage_seconds"] = {{"window", report.window_seconds},
                        {"forward", report.forward_seconds},
                        {"decode", report.decode_seconds}};
  return j.dump(2);
}

}  // namespace temprel
