#include "temprel/preprocess.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "temprel/rng.hpp"

namespace temprel {

int WindowInstance::first_token_of(const std::string& event_id) const {
  for (const auto& [id, idx] : event_first_tokens)
    if (id == event_id) return idx;
  return -1;
}

void PreprocessStats::merge(const PreprocessStats& other) {
  windows += other.windows;
  skipped_windows += other.skipped_windows;
  dropped_tlinks += other.dropped_tlinks;
  if (label_histogram.size() < other.label_histogram.size())
    label_histogram.resize(other.label_histogram.size(), 0);
  for (std::size_t i = 0; i < other.label_histogram.size(); ++i)
    label_histogram[i] += other.label_histogram[i];
}

std::vector<PairTuple> densify(const std::vector<int>& e1_span, const std::vector<int>& e2_span,
                               LabelId label, const DatasetProfile& profile) {
  if (label == kNoneLabel) throw DataError("densify: NONE is not a relation label");
  (void)profile.name_of(label);  // range check
  for (int i : e1_span)
    for (int j : e2_span)
      if (i == j)
        throw DataError("densify: overlapping event spans at token " + std::to_string(i));
  std::vector<PairTuple> tuples;
  tuples.reserve(e1_span.size() * e2_span.size());
  for (int i : e1_span)
    for (int j : e2_span) tuples.push_back({i, j, label});
  return tuples;
}

void build_gold(int n, const std::vector<PairTuple>& tuples, const DatasetProfile& profile,
                BoolMat& arc_gold, LabelMat& rel_gold) {
  arc_gold = BoolMat::Constant(n, n, false);
  rel_gold = LabelMat::Constant(n, n, kNoneLabel);

  for (const auto& t : tuples) {
    if (t.i < 0 || t.i >= n || t.j < 0 || t.j >= n)
      throw DataError("build_gold: tuple index out of window range");
    if (t.i == t.j) throw DataError("build_gold: self-pair at token " + std::to_string(t.i));
    const LabelId inv = profile.inverse(t.label);
    const LabelId prev = rel_gold(t.i, t.j);
    if (prev != kNoneLabel && prev != t.label)
      throw DataError("build_gold: conflicting labels for pair (" + std::to_string(t.i) + "," +
                      std::to_string(t.j) + "): " + profile.name_of(prev) + " vs " +
                      profile.name_of(t.label));
    rel_gold(t.i, t.j) = t.label;
    rel_gold(t.j, t.i) = inv;
    if (profile.is_self_inverse(t.label)) {
      arc_gold(t.i, t.j) = true;
      arc_gold(t.j, t.i) = true;
    } else if (profile.is_canonical(t.label)) {
      arc_gold(t.i, t.j) = true;
    } else {
      arc_gold(t.j, t.i) = true;
    }
  }
}

BoolMat sample_mask(const BoolMat& arc_gold, std::uint64_t seed, double negative_rate) {
  if (negative_rate < 0.0 || negative_rate > 1.0)
    throw UsageError("sample_mask: negative_rate must lie in [0,1]");
  const int n = static_cast<int>(arc_gold.rows());
  BoolMat mask = BoolMat::Constant(n, n, false);
  Rng rng(splitmix64(seed));
  // Column-major iteration matches Eigen storage; order is part of the
  // determinism contract.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      if (arc_gold(i, j) || arc_gold(j, i))
        mask(i, j) = true;
      else
        mask(i, j) = bernoulli(rng, negative_rate);
    }
  }
  return mask;
}

namespace {

// Gold matrices and mask for the sentence range [first, last] of a document.
WindowInstance build_window(const Document& doc, int first, int last,
                            const DatasetProfile& profile, const PreprocessOptions& options,
                            std::set<int>* placed_tlinks, PreprocessStats* stats) {
  WindowInstance w;
  w.doc_id = doc.doc_id;
  w.window_index = first;

  std::vector<int> sentence_offset(doc.sentences.size(), -1);
  for (int s = first; s <= last; ++s) {
    sentence_offset[s] = static_cast<int>(w.tokens.size());
    for (std::size_t t = 0; t < doc.sentences[s].size(); ++t) {
      w.tokens.push_back(doc.sentences[s][t]);
      w.token_origin.emplace_back(s, static_cast<int>(t));
    }
  }

  std::map<std::string, std::vector<int>> event_tokens;
  for (const auto& e : doc.events) {
    if (e.sentence < first || e.sentence > last) continue;
    std::vector<int> span;
    for (int t = e.start; t < e.end; ++t) span.push_back(sentence_offset[e.sentence] + t);
    w.event_first_tokens.emplace_back(e.id, span.front());
    event_tokens.emplace(e.id, std::move(span));
  }

  std::vector<PairTuple> tuples;
  for (std::size_t k = 0; k < doc.tlinks.size(); ++k) {
    const TLink& link = doc.tlinks[k];
    auto src = event_tokens.find(link.src);
    auto dst = event_tokens.find(link.dst);
    if (src == event_tokens.end() || dst == event_tokens.end()) continue;
    if (placed_tlinks) placed_tlinks->insert(static_cast<int>(k));
    auto dense = densify(src->second, dst->second, link.label, profile);
    tuples.insert(tuples.end(), dense.begin(), dense.end());
    if (stats) {
      if (stats->label_histogram.size() < static_cast<std::size_t>(profile.label_count()))
        stats->label_histogram.resize(profile.label_count(), 0);
      stats->label_histogram[link.label] += 1;
    }
  }

  build_gold(w.n(), tuples, profile, w.arc_gold, w.rel_gold);
  w.loss_mask = sample_mask(
      w.arc_gold,
      derive_seed(options.seed, doc.doc_id, static_cast<std::uint64_t>(w.window_index)),
      options.negative_sample_rate);
  return w;
}

}  // namespace

std::vector<WindowInstance> make_windows(const Document& doc, const DatasetProfile& profile,
                                         const PreprocessOptions& options,
                                         PreprocessStats* stats) {
  const int n_sentences = static_cast<int>(doc.sentences.size());
  std::vector<WindowInstance> windows;
  std::set<int> placed;

  const int n_windows = std::max(1, n_sentences - 1);
  for (int first = 0; first < n_windows; ++first) {
    const int last = std::min(first + 1, n_sentences - 1);
    int window_len = 0;
    for (int s = first; s <= last; ++s) window_len += static_cast<int>(doc.sentences[s].size());
    if (window_len > options.max_window_len) {
      if (stats) ++stats->skipped_windows;
      // Still scan for contained tlinks so they are not misreported as
      // dropped-by-distance.
      for (std::size_t k = 0; k < doc.tlinks.size(); ++k) {
        const auto* se = doc.find_event(doc.tlinks[k].src);
        const auto* de = doc.find_event(doc.tlinks[k].dst);
        if (se && de && se->sentence >= first && se->sentence <= last &&
            de->sentence >= first && de->sentence <= last)
          placed.insert(static_cast<int>(k));
      }
      continue;
    }
    windows.push_back(build_window(doc, first, last, profile, options, &placed, stats));
    if (stats) ++stats->windows;
  }

  if (stats)
    stats->dropped_tlinks += static_cast<long>(doc.tlinks.size()) - static_cast<long>(placed.size());
  return windows;
}

std::vector<WindowInstance> make_windows(const std::vector<Document>& docs,
                                         const DatasetProfile& profile,
                                         const PreprocessOptions& options,
                                         PreprocessStats* stats) {
  std::vector<WindowInstance> windows;
  for (const auto& doc : docs) {
    auto w = make_windows(doc, profile, options, stats);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }
  return windows;
}

std::vector<WindowInstance> make_raw_windows(const RawInput& raw,
                                             const PreprocessOptions& options,
                                             PreprocessStats* stats) {
  const int n_sentences = static_cast<int>(raw.sentences.size());
  std::vector<WindowInstance> windows;
  const int n_windows = std::max(1, n_sentences - 1);
  for (int first = 0; first < n_windows; ++first) {
    const int last = std::min(first + 1, n_sentences - 1);
    WindowInstance w;
    w.doc_id = raw.doc_id;
    w.window_index = first;
    for (int s = first; s <= last; ++s)
      for (std::size_t t = 0; t < raw.sentences[s].size(); ++t) {
        w.tokens.push_back(raw.sentences[s][t]);
        w.token_origin.emplace_back(s, static_cast<int>(t));
      }
    if (w.n() > options.max_window_len) {
      if (stats) ++stats->skipped_windows;
      continue;
    }
    const int n = w.n();
    w.arc_gold = BoolMat::Constant(n, n, false);
    w.rel_gold = LabelMat::Constant(n, n, kNoneLabel);
    w.loss_mask = BoolMat::Constant(n, n, false);
    windows.push_back(std::move(w));
    if (stats) ++stats->windows;
  }
  return windows;
}

}  // namespace temprel
