#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "temprel/model.hpp"
#include "temprel/preprocess.hpp"
#include "temprel/schema.hpp"

namespace temprel {

/// Decoded relations for one window: upper-triangular pairs (i < j) carrying
/// a non-NONE label. Absent pairs mean NONE.
struct TemporalGraph {
  int n = 0;
  std::map<std::pair<int, int>, LabelId> pairs;

  LabelId label_at(int i, int j) const {
    auto it = pairs.find({i, j});
    return it == pairs.end() ? kNoneLabel : it->second;
  }
};

/// An arc exists exactly when its logit is strictly positive.
template <class Scalar>
BoolMat arc_pred(const Mat<Scalar>& s_arc) {
  BoolMat out(s_arc.rows(), s_arc.cols());
  for (Eigen::Index j = 0; j < s_arc.cols(); ++j)
    for (Eigen::Index i = 0; i < s_arc.rows(); ++i) out(i, j) = s_arc(i, j) > Scalar(0);
  return out;
}

/// Argmax label column for the ordered pair (i, j); ties resolve to the
/// lowest column index.
template <class Scalar>
int argmax_column(const ScoreSet<Scalar>& scores, int i, int j) {
  int best = 0;
  Scalar best_score = scores.rel(i, j, 0);
  for (int k = 1; k < scores.column_count(); ++k) {
    const Scalar s = scores.rel(i, j, k);
    if (s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return best;
}

/// Pairwise decode. With the arc module active, a pair is labelled only when
/// at least one of its two directed arcs fires; the label argmax runs over
/// real labels. With the arc module ablated, the argmax includes NONE and
/// gates itself. Each pair decodes independently of every other pair.
template <class Scalar>
TemporalGraph decode(const ScoreSet<Scalar>& scores) {
  TemporalGraph g;
  g.n = scores.n;
  BoolMat arcs;
  if (scores.has_arc) arcs = arc_pred(scores.s_arc);
  for (int j = 0; j < scores.n; ++j) {
    for (int i = 0; i < j; ++i) {
      if (scores.has_arc) {
        const int arc_count = (arcs(i, j) ? 1 : 0) + (arcs(j, i) ? 1 : 0);
        if (arc_count == 0) continue;
        g.pairs.emplace(std::make_pair(i, j),
                        scores.column_label(argmax_column(scores, i, j)));
      } else {
        const LabelId label = scores.column_label(argmax_column(scores, i, j));
        if (label == kNoneLabel) continue;
        g.pairs.emplace(std::make_pair(i, j), label);
      }
    }
  }
  return g;
}

/// Upper-triangular gold graph of a window, for scoring against decodes.
template <class W>
TemporalGraph gold_graph(const W& w) {
  TemporalGraph g;
  g.n = w.n();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < j; ++i)
      if (w.rel_gold(i, j) != kNoneLabel) g.pairs.emplace(std::make_pair(i, j), w.rel_gold(i, j));
  return g;
}

/// Projects a token-level graph onto event pairs via each event's first
/// token. Keys are (earlier event, later event) in token order; pairs whose
/// token pair decoded to NONE are omitted.
inline std::map<std::pair<std::string, std::string>, LabelId> event_level(
    const TemporalGraph& g, const std::vector<std::pair<std::string, int>>& event_first_tokens) {
  std::map<std::pair<std::string, std::string>, LabelId> out;
  const auto& ev = event_first_tokens;
  for (std::size_t a = 0; a < ev.size(); ++a) {
    for (std::size_t b = a + 1; b < ev.size(); ++b) {
      const auto& [id_a, tok_a] = ev[a];
      const auto& [id_b, tok_b] = ev[b];
      if (tok_a == tok_b) continue;  // degenerate overlap: no pair to score
      const bool a_first = tok_a < tok_b;
      const int i = a_first ? tok_a : tok_b, j = a_first ? tok_b : tok_a;
      const LabelId label = g.label_at(i, j);
      if (label == kNoneLabel) continue;
      if (a_first)
        out.emplace(std::make_pair(id_a, id_b), label);
      else
        out.emplace(std::make_pair(id_b, id_a), label);
    }
  }
  return out;
}

}  // namespace temprel
