#pragma once

#include <functional>
#include <string>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/eval.hpp"
#include "temprel/model.hpp"
#include "temprel/objective.hpp"
#include "temprel/preprocess.hpp"

namespace temprel {

struct TrainOptions {
  int epochs = 40;
  std::uint64_t seed = 0;
  double dev_fraction = 0.1;  // document-level holdout when no dev set is given
  AdamConfig adam;
  PreprocessOptions preprocess;
  std::string embeddings_path;   // required for external-vectors mode
  std::string loss_curve_path;   // optional per-step TSV
};

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double arc = 0, rel = 0, joint = 0;
  double lr = 0, grad_norm = 0;
};

struct EpochStats {
  int epoch = 0;
  long steps = 0;
  double mean_arc = 0, mean_rel = 0, mean_joint = 0;
  double lr = 0;
  // Micro scores on the dev split; -1 when no dev data exists.
  double dev_precision = -1, dev_recall = -1, dev_f1 = -1;
};

/// Invoked after every epoch; returning false stops training (the best
/// checkpoint so far is kept).
using EpochCallback = std::function<bool(const EpochStats&)>;

struct TrainResult {
  BiaffineModel<float> model;
  std::vector<EpochStats> epochs;
  double best_dev_f1 = -1;
  int best_epoch = -1;
  long total_steps = 0;
  long skipped_windows = 0;  // windows with no supervised cells
};

/// Joint training over preprocessed windows. Dev scoring decodes each dev
/// window and compares event-level pairs against gold; the parameters of the
/// best dev epoch are restored at the end (last epoch when no dev data).
TrainResult train_windows(const std::vector<WindowInstance>& train_set,
                          const std::vector<WindowInstance>& dev_set,
                          const DatasetProfile& prof, const ModelConfig& mcfg,
                          const TrainOptions& topt, const EpochCallback& cb = nullptr);

/// Convenience wrapper: windows the corpus and, when dev_docs is empty and
/// dev_fraction > 0, holds out a deterministic document-level dev split.
TrainResult train(const std::vector<Document>& docs, const std::vector<Document>& dev_docs,
                  const DatasetProfile& prof, const ModelConfig& mcfg, const TrainOptions& topt,
                  const EpochCallback& cb = nullptr);

/// Micro F1 of a model over a window set (event-level, first window wins for
/// pairs seen in several windows).
EvalReport evaluate_windows(const BiaffineModel<float>& model,
                            const std::vector<WindowInstance>& windows);

}  // namespace temprel
