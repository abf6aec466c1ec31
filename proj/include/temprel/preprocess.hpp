#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/schema.hpp"

namespace temprel {

using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using LabelMat = Eigen::Array<LabelId, Eigen::Dynamic, Eigen::Dynamic>;

/// Token-level relation tuple inside one window: label between tokens i and j.
struct PairTuple {
  int i = 0;
  int j = 0;
  LabelId label = kNoneLabel;
};

/// One two-sentence training/inference unit. Gold matrices store both
/// directions (rel_gold[j][i] == INV(rel_gold[i][j])); the canonical label's
/// source token carries the single outgoing arc of an invertible pair, while
/// self-inverse labels set both arc directions.
struct WindowInstance {
  std::string doc_id;
  int window_index = 0;  // index of the first sentence in the window
  std::vector<std::string> tokens;
  std::vector<std::pair<int, int>> token_origin;  // (sentence index, token index)
  BoolMat arc_gold;
  LabelMat rel_gold;
  BoolMat loss_mask;
  std::vector<std::pair<std::string, int>> event_first_tokens;  // event id -> window token

  int n() const { return static_cast<int>(tokens.size()); }
  int first_token_of(const std::string& event_id) const;  // -1 when absent
};

struct PreprocessOptions {
  std::uint64_t seed = 0;
  int max_window_len = 128;
  double negative_sample_rate = 0.5;
};

struct PreprocessStats {
  long windows = 0;
  long skipped_windows = 0;   // exceeded max_window_len
  long dropped_tlinks = 0;    // events farther than adjacent sentences apart
  std::vector<long> label_histogram;  // indexed by label id, gold pairs per label

  void merge(const PreprocessStats& other);
};

/// Full cross product {(i, j, label)} over two disjoint token index sets.
std::vector<PairTuple> densify(const std::vector<int>& e1_span, const std::vector<int>& e2_span,
                               LabelId label, const DatasetProfile& profile);

/// Builds both gold matrices from token-level tuples. Conflicting labels for
/// an ordered pair raise DataError naming the pair.
void build_gold(int n, const std::vector<PairTuple>& tuples, const DatasetProfile& profile,
                BoolMat& arc_gold, LabelMat& rel_gold);

/// Gold-arc cells (either direction) are always kept; the remaining
/// off-diagonal cells are sampled independently at `negative_rate`.
BoolMat sample_mask(const BoolMat& arc_gold, std::uint64_t seed, double negative_rate = 0.5);

/// Sliding two-consecutive-sentence windows (one window for single-sentence
/// documents). TLINKs that fit no window are counted as dropped.
std::vector<WindowInstance> make_windows(const Document& doc, const DatasetProfile& profile,
                                         const PreprocessOptions& options,
                                         PreprocessStats* stats = nullptr);

std::vector<WindowInstance> make_windows(const std::vector<Document>& docs,
                                         const DatasetProfile& profile,
                                         const PreprocessOptions& options,
                                         PreprocessStats* stats = nullptr);

/// Windows for raw prediction input: no gold matrices, mask empty.
std::vector<WindowInstance> make_raw_windows(const RawInput& raw, const PreprocessOptions& options,
                                             PreprocessStats* stats = nullptr);

/// Versioned binary window file.
void write_windows(const std::string& path, const std::vector<WindowInstance>& windows,
                   const DatasetProfile& profile);
std::vector<WindowInstance> read_windows(const std::string& path, const DatasetProfile& profile);

}  // namespace temprel
