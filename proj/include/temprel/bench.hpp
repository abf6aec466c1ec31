#pragma once

#include <functional>
#include <string>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/decode.hpp"
#include "temprel/model.hpp"
#include "temprel/preprocess.hpp"

namespace temprel {

struct BenchOptions {
  int repetitions = 10;
  int workers = 1;
  PreprocessOptions preprocess;
};

struct BenchReport {
  std::vector<double> sentences_per_sec;  // one entry per repetition
  double mean = 0, stddev = 0;            // over repetitions (sample stddev)
  long sentences = 0, windows = 0;        // per repetition
  double window_seconds = 0, forward_seconds = 0, decode_seconds = 0;  // totals
  std::string cpu_model;
  unsigned hardware_threads = 0;
};

/// Receives every decoded window once per repetition, after the timer has
/// stopped. Score aggregation and any output must happen here so they stay
/// outside the measured region.
using BenchSink =
    std::function<void(int repetition, const std::vector<TemporalGraph>& graphs)>;

/// Times the full inference path (windowing, forward scoring, decoding) over
/// the corpus, `repetitions` times. The measured region excludes input
/// parsing, metric computation and all I/O.
BenchReport run_bench(const BiaffineModel<float>& model, const std::vector<RawInput>& raws,
                      const BenchOptions& options, const BenchSink& sink = nullptr);

std::string format_bench(const BenchReport& report);
std::string bench_json(const BenchReport& report);

}  // namespace temprel
