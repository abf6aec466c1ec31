#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "temprel/schema.hpp"

namespace temprel {

/// Labelled event pairs keyed by (src id, dst id).
using PairLabelMap = std::map<std::pair<std::string, std::string>, LabelId>;

/// Rewrites every entry with lexicographically ordered keys, inverting the
/// label when the key order flips. NONE entries are dropped. Entries that
/// disagree after canonicalization raise DataError.
PairLabelMap canonicalize(const PairLabelMap& pairs, const DatasetProfile& prof);

struct LabelScore {
  std::string name;
  long gold = 0, pred = 0, correct = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct EvalReport {
  std::vector<LabelScore> per_label;  // profile order, NONE excluded
  long gold_total = 0, pred_total = 0, correct_total = 0;
  double precision = 0, recall = 0, f1 = 0;  // micro-averaged
};

/// Micro-averaged precision/recall/F1 over non-NONE pairs. A predicted pair
/// counts as correct only if the gold set holds the same pair with the same
/// (canonicalized) label.
EvalReport evaluate(const PairLabelMap& gold, const PairLabelMap& pred,
                    const DatasetProfile& prof);

std::string format_report(const EvalReport& report);
std::string report_tsv(const EvalReport& report);

}  // namespace temprel
