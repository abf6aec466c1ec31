#include "temprel/eval.hpp"

#include <cstdio>
#include <sstream>

#include "temprel/errors.hpp"

namespace temprel {

PairLabelMap canonicalize(const PairLabelMap& pairs, const DatasetProfile& prof) {
  PairLabelMap out;
  for (const auto& [key, label] : pairs) {
    if (label == kNoneLabel) continue;
    if (label < 0 || label >= prof.label_count())
      throw DataError("pair (" + key.first + ", " + key.second + ") carries unknown label id");
    if (key.first == key.second)
      throw DataError("event pair relates '" + key.first + "' to itself");
    std::pair<std::string, std::string> canon = key;
    LabelId canon_label = label;
    if (key.second < key.first) {
      canon = {key.second, key.first};
      canon_label = prof.inverse(label);
    }
    auto [it, inserted] = out.emplace(canon, canon_label);
    if (!inserted && it->second != canon_label)
      throw DataError("conflicting labels for event pair (" + canon.first + ", " +
                      canon.second + ")");
  }
  return out;
}

namespace {

void finish(LabelScore& s) {
  s.precision = s.pred == 0 ? 0.0 : static_cast<double>(s.correct) / s.pred;
  s.recall = s.gold == 0 ? 0.0 : static_cast<double>(s.correct) / s.gold;
  s.f1 = (s.precision + s.recall) == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
}

}  // namespace

EvalReport evaluate(const PairLabelMap& gold, const PairLabelMap& pred,
                    const DatasetProfile& prof) {
  const PairLabelMap g = canonicalize(gold, prof);
  const PairLabelMap p = canonicalize(pred, prof);

  EvalReport report;
  report.per_label.resize(prof.label_count() - 1);
  for (int id = 1; id < prof.label_count(); ++id)
    report.per_label[id - 1].name = prof.name_of(id);

  for (const auto& [key, label] : g) ++report.per_label[label - 1].gold;
  for (const auto& [key, label] : p) {
    ++report.per_label[label - 1].pred;
    auto it = g.find(key);
    if (it != g.end() && it->second == label) ++report.per_label[label - 1].correct;
  }
  for (auto& s : report.per_label) {
    finish(s);
    report.gold_total += s.gold;
    report.pred_total += s.pred;
    report.correct_total += s.correct;
  }
  LabelScore micro;
  micro.gold = report.gold_total;
  micro.pred = report.pred_total;
  micro.correct = report.correct_total;
  finish(micro);
  report.precision = micro.precision;
  report.recall = micro.recall;
  report.f1 = micro.f1;
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %7s %7s %8s\n", "label", "precision",
                "recall", "f1", "gold", "pred", "correct");
  out << line;
  auto row = [&](const std::string& name, double pp, double rr, double ff, long g, long p,
                 long c) {
    std::snprintf(line, sizeof(line), "%-14s %9.4f %9.4f %9.4f %7ld %7ld %8ld\n", name.c_str(),
                  pp, rr, ff, g, p, c);
    out << line;
  };
  for (const auto& s : report.per_label)
    row(s.name, s.precision, s.recall, s.f1, s.gold, s.pred, s.correct);
  row("micro", report.precision, report.recall, report.f1, report.gold_total, report.pred_total,
      report.correct_total);
  return out.str();
}

std::string report_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "label\tprecision\trecall\tf1\tgold\tpred\tcorrect\n";
  char line[160];
  auto row = [&](const std::string& name, double pp, double rr, double ff, long g, long p,
                 long c) {
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%.6f\t%ld\t%ld\t%ld\n", name.c_str(), pp,
                  rr, ff, g, p, c);
    out << line;
  };
  for (const auto& s : report.per_label)
    row(s.name, s.precision, s.recall, s.f1, s.gold, s.pred, s.correct);
  row("micro", report.precision, report.recall, report.f1, report.gold_total, report.pred_total,
      report.correct_total);
  return out.str();
}

}  // namespace temprel
