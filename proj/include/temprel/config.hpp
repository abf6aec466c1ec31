#pragma once

#include <string>

#include "temprel/bench.hpp"
#include "temprel/corpus.hpp"
#include "temprel/model.hpp"
#include "temprel/objective.hpp"
#include "temprel/preprocess.hpp"

namespace temprel {

/// One place for every runtime knob. Values come from (in increasing
/// precedence) built-in defaults, a JSON config file, and command-line flags.
struct RunConfig {
  std::string profile_name = "tbdense";
  std::uint64_t seed = 0;
  ModelConfig model;
  AdamConfig adam;
  PreprocessOptions preprocess;
  SyntheticOptions synth;
  int synth_docs = 100;
  int epochs = -1;  // -1: use the profile default
  double dev_fraction = 0.1;
  std::string embeddings_path;
  std::string loss_curve_path;
  int bench_repetitions = 10;
  int workers = 1;

  /// tbdense trains for 40 epochs by default, matres for 19.
  int resolved_epochs() const {
    if (epochs > 0) return epochs;
    return profile_name == "matres" ? 19 : 40;
  }
};

/// Parses a JSON config file. Unknown keys anywhere raise UsageError naming
/// the key; missing sections keep their defaults.
RunConfig load_run_config(const std::string& path);

/// Resolves the config path: explicit flag value, else the TEMPREL_CONFIG
/// environment variable, else empty (pure defaults).
std::string default_config_path();

}  // namespace temprel
