#pragma once

#include <string>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/eval.hpp"
#include "temprel/model.hpp"
#include "temprel/preprocess.hpp"

namespace temprel {

struct PredictionOptions {
  PreprocessOptions preprocess;
  int workers = 1;
};

/// Token-level relation between two global token positions (src precedes dst
/// in document order).
struct PredictedEdge {
  int src_sentence = 0, src_token = 0;
  int dst_sentence = 0, dst_token = 0;
  LabelId label = kNoneLabel;
};

struct DocPrediction {
  std::string doc_id;
  std::vector<PredictedEdge> edges;  // sorted by position
  PairLabelMap event_pairs;          // present only when events were supplied
  long skipped_windows = 0;          // windows over the length cap
};

/// Decodes every window of every document; token pairs shared by overlapping
/// windows take the first window's verdict. Documents are processed
/// independently (optionally across `workers` threads) and results keep
/// input order.
std::vector<DocPrediction> predict_docs(const BiaffineModel<float>& model,
                                        const std::vector<Document>& docs,
                                        const PredictionOptions& options);

std::vector<DocPrediction> predict_raw(const BiaffineModel<float>& model,
                                       const std::vector<RawInput>& raws,
                                       const PredictionOptions& options);

/// Line-delimited prediction file with a leading header record.
void write_predictions(const std::string& path, const std::vector<DocPrediction>& preds,
                       const DatasetProfile& profile);
std::vector<DocPrediction> read_predictions(const std::string& path,
                                            const DatasetProfile& profile);

/// Gold event pairs of a corpus keyed as "doc_id#event_id", suitable for
/// evaluate() against prediction event pairs keyed the same way.
PairLabelMap corpus_event_pairs(const std::vector<Document>& docs);
PairLabelMap prediction_event_pairs(const std::vector<DocPrediction>& preds);

}  // namespace temprel
