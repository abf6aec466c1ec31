// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Each criterion is independent; failures carry the measured numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "temprel/bench.hpp"
#include "temprel/decode.hpp"
#include "temprel/eval.hpp"
#include "temprel/model.hpp"
#include "temprel/objective.hpp"
#include "temprel/pipeline.hpp"
#include "temprel/preprocess.hpp"
#include "temprel/train.hpp"

using namespace temprel;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "temprel-acceptance";
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }
Outcome pass(std::string detail) { return {true, std::move(detail)}; }

// --- criterion 1: end-to-end gradient check --------------------------------

WindowInstance gradcheck_window(std::uint64_t seed) {
  const auto& prof = profile("tbdense");
  WindowInstance w;
  w.doc_id = "grad";
  w.tokens = {"t0", "t1", "t2", "t3", "t4", "t5"};
  for (int t = 0; t < 6; ++t) w.token_origin.emplace_back(0, t);
  static const std::vector<std::pair<int, int>> slots{{0, 3}, {1, 4}, {2, 5}, {1, 5}};
  static const std::vector<std::string> labels{"BEFORE", "SIMULTANEOUS", "INCLUDES", "VAGUE",
                                               "AFTER", "IS_INCLUDED"};
  const auto a = slots[seed % slots.size()];
  const auto b = slots[(seed + 2) % slots.size()];
  std::vector<PairTuple> tuples{{a.first, a.second, prof.id_of(labels[seed % labels.size()])}};
  if (b != a) tuples.push_back({b.first, b.second, prof.id_of(labels[(seed + 3) % labels.size()])});
  build_gold(6, tuples, prof, w.arc_gold, w.rel_gold);
  w.loss_mask = BoolMat::Constant(6, 6, true);
  for (int t = 0; t < 6; ++t) w.loss_mask(t, t) = false;
  return w;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.lstm_hidden = 3;
  cfg.lstm_layers = 2;
  cfg.mlp_dim = 3;
  cfg.dropout = 0.2;
  Vocab vocab({"<unk>", "t1", "t3", "t4"});

  long checked_entries = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    BiaffineModel<double> model(cfg, profile("tbdense"), vocab, seed);
    const WindowInstance w = gradcheck_window(seed);
    auto build_loss = [&](Tape<double>& tape) {
      Rng drop_rng(derive_seed(seed, "dropout", 0));
      auto f = model.forward(tape, w.tokens, drop_rng, true);
      return joint_loss(tape, arc_loss(tape, f.s_arc, w),
                        rel_loss(tape, f.s_rel, w, model.labels_include_none()));
    };
    auto loss_fn = [&]() {
      Tape<double> tape(false);
      return build_loss(tape).scalar();
    };
    auto backward_fn = [&]() {
      zero_grads(model.params());
      Tape<double> tape(true);
      auto loss = build_loss(tape);
      tape.backward(loss);
    };
    auto bad = testing::gradcheck(model.params(), loss_fn, backward_fn, 1e-5, 1e-4);
    for (const auto& p : model.params()) checked_entries += p.var.size();
    if (!bad.empty()) {
      const auto& m = bad.front();
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "seed %llu: %zu mismatches, first %s(%ld,%ld) analytic %.3e fd %.3e",
                    static_cast<unsigned long long>(seed), bad.size(), m.param.c_str(),
                    static_cast<long>(m.row), static_cast<long>(m.col), m.analytic, m.fd);
      return fail(buf);
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0)
    return fail("gradients matched but runtime " + std::to_string(elapsed) + "s exceeds 60s");
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "20 seeds, %ld parameter entries within 1e-4 relative, %.1fs", checked_entries,
                elapsed);
  return pass(buf);
}

// --- criterion 2: decoder vs brute force ------------------------------------

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(97);
  long pairs_checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = uniform_int(rng, 1, 12);
    const bool has_arc = trial % 2 == 0;
    const int columns = has_arc ? 6 : 7;
    ScoreSet<double> s;
    s.n = n;
    s.has_arc = has_arc;
    s.labels_include_none = !has_arc;
    if (has_arc) {
      s.s_arc.resize(n, n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) s.s_arc(i, j) = normal01(rng) * 2.0;
    }
    s.s_rel_flat.resize(n * n, columns);
    for (int k = 0; k < columns; ++k)
      for (int p = 0; p < n * n; ++p) s.s_rel_flat(p, k) = normal01(rng);

    TemporalGraph got = decode(s);
    TemporalGraph want;
    want.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        ++pairs_checked;
        int best = 0;
        for (int k = 1; k < columns; ++k)
          if (s.rel(i, j, k) > s.rel(i, j, best)) best = k;
        if (has_arc) {
          if (s.s_arc(i, j) > 0.0 || s.s_arc(j, i) > 0.0) want.pairs[{i, j}] = best + 1;
        } else if (best != 0) {
          want.pairs[{i, j}] = best;
        }
      }
    if (got.pairs != want.pairs)
      return fail("trial " + std::to_string(trial) + " (n=" + std::to_string(n) +
                  "): decoded graph differs from brute force");
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0)
    return fail("decodes matched but runtime " + std::to_string(elapsed) + "s exceeds 10s");
  char buf[120];
  std::snprintf(buf, sizeof(buf), "500 score sets, %ld pairs identical, %.2fs", pairs_checked,
                elapsed);
  return pass(buf);
}

// --- criterion 3: two-sidedness invariants ----------------------------------

Outcome criterion3() {
  const auto& prof = profile("tbdense");
  auto docs = generate_synthetic(271, 100, prof);
  PreprocessOptions opts;
  opts.seed = 7;
  auto windows = make_windows(docs, prof, opts);
  long violations = 0, gold_pairs = 0;
  for (const auto& w : windows) {
    const int n = w.n();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (w.rel_gold(i, j) != prof.inverse(w.rel_gold(j, i))) ++violations;
        if (i < j && w.rel_gold(i, j) != kNoneLabel) {
          ++gold_pairs;
          const bool fwd = w.arc_gold(i, j), bwd = w.arc_gold(j, i);
          if (prof.is_self_inverse(w.rel_gold(i, j))) {
            if (!(fwd && bwd)) ++violations;
          } else {
            if (fwd == bwd) ++violations;  // exactly one direction required
          }
        }
        if (w.rel_gold(i, j) == kNoneLabel && (w.arc_gold(i, j) && !w.arc_gold(j, i)))
          ++violations;
      }
  }
  if (violations > 0)
    return fail(std::to_string(violations) + " violations over " +
                std::to_string(windows.size()) + " windows");
  return pass(std::to_string(windows.size()) + " windows, " + std::to_string(gold_pairs) +
              " gold pairs, zero violations");
}

// --- criterion 4: analytic loss values ---------------------------------------

Outcome criterion4() {
  const WindowInstance w = [] {
    const auto& prof = profile("tbdense");
    WindowInstance win;
    win.tokens = {"a", "b", "c", "d", "e", "f"};
    build_gold(6, {{1, 4, prof.id_of("BEFORE")}, {2, 5, prof.id_of("SIMULTANEOUS")}}, prof,
               win.arc_gold, win.rel_gold);
    win.loss_mask = BoolMat::Constant(6, 6, true);
    for (int t = 0; t < 6; ++t) win.loss_mask(t, t) = false;
    return win;
  }();
  Tape<double> tape(false);

  const double arc_uniform =
      arc_loss(tape, Var<double>::constant(Mat<double>::Zero(6, 6)), w).scalar();
  if (std::abs(arc_uniform - std::log(2.0)) > 1e-6)
    return fail("uniform arc loss " + std::to_string(arc_uniform) + " != ln 2");

  const double rel_uniform =
      rel_loss(tape, Var<double>::constant(Mat<double>::Zero(36, 6)), w, false).scalar();
  if (std::abs(rel_uniform - std::log(6.0)) > 1e-6)
    return fail("uniform rel loss " + std::to_string(rel_uniform) + " != ln 6");

  const double rel_uniform_none =
      rel_loss(tape, Var<double>::constant(Mat<double>::Zero(36, 7)), w, true).scalar();
  if (std::abs(rel_uniform_none - std::log(7.0)) > 1e-6)
    return fail("uniform rel loss with NONE " + std::to_string(rel_uniform_none) + " != ln 7");

  Mat<double> arc_perfect = Mat<double>::Constant(6, 6, -30.0);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i)
      if (w.arc_gold(i, j)) arc_perfect(i, j) = 30.0;
  const double arc_p = arc_loss(tape, Var<double>::constant(arc_perfect), w).scalar();
  if (arc_p >= 1e-6) return fail("perfect arc loss " + std::to_string(arc_p) + " >= 1e-6");

  Mat<double> rel_perfect = Mat<double>::Constant(36, 6, -30.0);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < j; ++i)
      if (w.rel_gold(i, j) != kNoneLabel)
        rel_perfect(pair_index(i, j, 6), w.rel_gold(i, j) - 1) = 30.0;
  const double rel_p =
      rel_loss(tape, Var<double>::constant(rel_perfect), w, false).scalar();
  if (rel_p >= 1e-6) return fail("perfect rel loss " + std::to_string(rel_p) + " >= 1e-6");

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "arc ln2 err %.1e, rel lnL err %.1e, perfect losses %.1e/%.1e",
                std::abs(arc_uniform - std::log(2.0)), std::abs(rel_uniform - std::log(6.0)),
                arc_p, rel_p);
  return pass(buf);
}

// --- criteria 5 and 6: learnability and the no-ARC ablation ------------------

struct LearnRun {
  double best_f1 = -1;
  int best_epoch = -1;
  int epochs_run = 0;
  double seconds = 0;
};

std::vector<Document> learnability_corpus() {
  SyntheticOptions sopt;
  sopt.min_sentences = 2;
  sopt.max_sentences = 2;
  sopt.min_filler_tokens = 2;
  sopt.max_filler_tokens = 3;
  sopt.event_prob = 1.0;
  sopt.link_prob = 1.0;
  sopt.multi_token_event_prob = 0.0;
  sopt.mixture = {1, 1, 1, 1, 1, 1};  // balanced labels
  return generate_synthetic(1234, 200, profile("tbdense"), sopt);
}

LearnRun learnability_run(const std::vector<Document>& docs, std::uint64_t seed, bool use_arc) {
  ModelConfig mcfg;  // full defaults: 100/400x2/300, dropout 0.33
  mcfg.use_arc_module = use_arc;
  TrainOptions topt;
  topt.epochs = 12;  // well inside the allowed 40
  topt.seed = seed;
  topt.dev_fraction = 0.1;
  topt.adam.lr = 1e-3;  // raised for from-scratch embeddings

  LearnRun run;
  const auto start = std::chrono::steady_clock::now();
  auto result = train(docs, {}, profile("tbdense"), mcfg, topt, [&](const EpochStats& s) {
    run.epochs_run = s.epoch + 1;
    return !(s.dev_f1 >= 0.98);  // early stop once comfortably past the bar
  });
  run.best_f1 = result.best_dev_f1;
  run.best_epoch = result.best_epoch;
  run.seconds = seconds_since(start);
  return run;
}

std::vector<LearnRun> g_full_runs;  // shared between criteria 5 and 6
const std::vector<std::uint64_t> kLearnSeeds{11, 12, 13};

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  auto docs = learnability_corpus();
  g_full_runs.clear();
  int reached = 0;
  std::ostringstream detail;
  for (std::uint64_t seed : kLearnSeeds) {
    LearnRun run = learnability_run(docs, seed, true);
    g_full_runs.push_back(run);
    if (run.best_f1 >= 0.90) ++reached;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "seed %llu: f1 %.4f in %d epochs (%.0fs); ",
                  static_cast<unsigned long long>(seed), run.best_f1, run.epochs_run,
                  run.seconds);
    detail << buf;
  }
  const double elapsed = seconds_since(start);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "total %.0fs", elapsed);
  detail << buf;
  if (reached < 2)
    return fail("only " + std::to_string(reached) + "/3 seeds reached 0.90: " + detail.str());
  if (elapsed >= 600.0) return fail("f1 reached but runtime exceeds 600s: " + detail.str());
  return pass(std::to_string(reached) + "/3 seeds >= 0.90; " + detail.str());
}

Outcome criterion6() {
  if (g_full_runs.size() != kLearnSeeds.size())
    return fail("full-model runs unavailable (criterion 5 did not complete)");
  auto docs = learnability_corpus();
  double full_sum = 0, ablated_sum = 0;
  std::ostringstream detail;
  for (std::size_t i = 0; i < kLearnSeeds.size(); ++i) {
    LearnRun ablated = learnability_run(docs, kLearnSeeds[i], false);
    full_sum += g_full_runs[i].best_f1;
    ablated_sum += ablated.best_f1;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "seed %llu: full %.4f vs no-arc %.4f; ",
                  static_cast<unsigned long long>(kLearnSeeds[i]), g_full_runs[i].best_f1,
                  ablated.best_f1);
    detail << buf;
  }
  const double full_mean = full_sum / kLearnSeeds.size();
  const double ablated_mean = ablated_sum / kLearnSeeds.size();
  char buf[80];
  std::snprintf(buf, sizeof(buf), "means: full %.4f, no-arc %.4f", full_mean, ablated_mean);
  detail << buf;
  if (full_mean < ablated_mean - 0.02)
    return fail("full model underperforms the ablation: " + detail.str());
  return pass(detail.str());
}

// --- criterion 7: evaluation oracle ------------------------------------------

Outcome criterion7() {
  const auto& prof = profile("tbdense");
  Rng rng(771);
  const std::vector<std::string> ids{"u", "v", "w", "x", "y", "z", "p", "q"};

  auto random_maps = [&]() {
    PairLabelMap canonical, presented;
    const int entries = uniform_int(rng, 0, 15);
    for (int k = 0; k < entries; ++k) {
      int a = uniform_int(rng, 0, static_cast<int>(ids.size()) - 1);
      int b = uniform_int(rng, 0, static_cast<int>(ids.size()) - 1);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      canonical[{ids[a], ids[b]}] = uniform_int(rng, 1, prof.label_count() - 1);
    }
    for (const auto& [key, label] : canonical) {
      if (bernoulli(rng, 0.5))
        presented[{key.second, key.first}] = prof.inverse(label);
      else
        presented[key] = label;
    }
    return std::make_pair(canonical, presented);
  };

  for (int trial = 0; trial < 100; ++trial) {
    auto [gold_canon, gold_raw] = random_maps();
    auto [pred_canon, pred_raw] = random_maps();

    long correct = 0;
    for (const auto& [key, label] : pred_canon) {
      auto it = gold_canon.find(key);
      if (it != gold_canon.end() && it->second == label) ++correct;
    }
    const long g = static_cast<long>(gold_canon.size());
    const long p = static_cast<long>(pred_canon.size());
    const double precision = p == 0 ? 0.0 : static_cast<double>(correct) / p;
    const double recall = g == 0 ? 0.0 : static_cast<double>(correct) / g;
    const double f1 =
        precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);

    EvalReport r = evaluate(gold_raw, pred_raw, prof);
    if (r.gold_total != g || r.pred_total != p || r.correct_total != correct ||
        std::abs(r.precision - precision) > 1e-9 || std::abs(r.recall - recall) > 1e-9 ||
        std::abs(r.f1 - f1) > 1e-9) {
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "trial %d: got g/p/c=%ld/%ld/%ld P/R/F=%.12f/%.12f/%.12f, want "
                    "%ld/%ld/%ld %.12f/%.12f/%.12f",
                    trial, r.gold_total, r.pred_total, r.correct_total, r.precision, r.recall,
                    r.f1, g, p, correct, precision, recall, f1);
      return fail(buf);
    }
  }
  return pass("100 random map pairs match the counting oracle to 1e-9");
}

// --- criterion 8: determinism -------------------------------------------------

Outcome criterion8() {
  const auto& prof = profile("tbdense");
  SyntheticOptions sopt;
  sopt.min_sentences = 2;
  sopt.max_sentences = 3;
  auto docs = generate_synthetic(881, 10, prof, sopt);

  ModelConfig mcfg;
  mcfg.embed_dim = 12;
  mcfg.lstm_hidden = 8;
  mcfg.lstm_layers = 2;
  mcfg.mlp_dim = 8;
  TrainOptions topt;
  topt.epochs = 2;
  topt.seed = 42;
  topt.dev_fraction = 0.2;

  const auto dir = work_dir();
  auto run_once = [&](const std::string& tag) {
    auto result = train(docs, {}, prof, mcfg, topt);
    const auto model_path = dir / ("determinism-" + tag + ".model");
    save_model(result.model, model_path.string());
    PredictionOptions popt;
    popt.workers = 2;
    auto preds = predict_docs(result.model, docs, popt);
    const auto pred_path = dir / ("determinism-" + tag + ".pred");
    write_predictions(pred_path.string(), preds, prof);
    return std::make_pair(slurp(model_path), slurp(pred_path));
  };

  auto [model_a, pred_a] = run_once("a");
  auto [model_b, pred_b] = run_once("b");
  if (model_a != model_b)
    return fail("checkpoints differ between identical runs (" +
                std::to_string(model_a.size()) + " vs " + std::to_string(model_b.size()) +
                " bytes)");
  if (pred_a != pred_b) return fail("prediction files differ between identical runs");
  return pass("checkpoint (" + std::to_string(model_a.size()) +
              " bytes) and predictions byte-identical across two runs");
}

// --- criterion 9: throughput harness ------------------------------------------

Outcome criterion9() {
  const auto& prof = profile("tbdense");
  SyntheticOptions sopt;
  sopt.min_sentences = 4;
  sopt.max_sentences = 4;
  auto base_docs = generate_synthetic(991, 250, prof, sopt);     // 1000 sentences
  auto double_docs = generate_synthetic(991, 500, prof, sopt);   // 2000 sentences

  ModelConfig mcfg;
  mcfg.embed_dim = 12;
  mcfg.lstm_hidden = 8;
  mcfg.lstm_layers = 1;
  mcfg.mlp_dim = 8;
  BiaffineModel<float> model(mcfg, prof, Vocab(), 7);

  std::vector<RawInput> base, doubled;
  for (const auto& d : base_docs) base.push_back(as_raw(d));
  for (const auto& d : double_docs) doubled.push_back(as_raw(d));

  BenchOptions opts;
  opts.repetitions = 10;
  BenchReport small = run_bench(model, base, opts);
  BenchReport large = run_bench(model, doubled, opts);

  if (small.sentences != 1000)
    return fail("expected 1000 sentences, generated " + std::to_string(small.sentences));
  if (small.sentences_per_sec.size() != 10 || large.sentences_per_sec.size() != 10)
    return fail("expected 10 repetitions in both reports");
  if (!(small.mean > 0.0) || !std::isfinite(small.stddev))
    return fail("mean/stddev not reported sanely");
  const double decode_ratio = large.decode_seconds / small.decode_seconds;
  if (decode_ratio > 2.5) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "decode stage scales superlinearly: %.4fs -> %.4fs (%.2fx)",
                  small.decode_seconds, large.decode_seconds, decode_ratio);
    return fail(buf);
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "10 reps on 1000 sentences: %.1f +/- %.1f sent/s; decode ratio at 2x corpus "
                "%.2fx (<= 2.5x)",
                small.mean, small.stddev, decode_ratio);
  return pass(buf);
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "end-to-end gradients match finite differences", criterion1},
      {2, "decoder equals brute-force pair evaluation", criterion2},
      {3, "gold matrices satisfy the two-sided invariants", criterion3},
      {4, "loss values match their closed forms", criterion4},
      {5, "synthetic corpus is learnable to f1 >= 0.90", criterion5},
      {6, "full model is not inferior to the no-arc ablation", criterion6},
      {7, "evaluation matches the counting oracle", criterion7},
      {8, "identical config and seed reproduce bytes", criterion8},
      {9, "throughput harness completes and decode scales linearly", criterion9},
  };

  bool all_pass = true;
  for (const auto& e : entries) {
    Outcome outcome;
    try {
      outcome = e.run();
    } catch (const std::exception& ex) {
      outcome = fail(std::string("unhandled exception: ") + ex.what());
    }
    all_pass = all_pass && outcome.pass;
    std::printf("[%s] criterion %d: %s — %s\n", outcome.pass ? "PASS" : "FAIL", e.id, e.name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
