#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "temprel/bench.hpp"
#include "temprel/config.hpp"
#include "temprel/corpus.hpp"
#include "temprel/pipeline.hpp"
#include "temprel/preprocess.hpp"
#include "temprel/train.hpp"

namespace {

using namespace temprel;

void print_histogram(const DatasetProfile& prof, const std::vector<long>& histogram) {
  long total = 0;
  for (std::size_t id = 1; id < histogram.size(); ++id) total += histogram[id];
  std::cout << "label histogram (" << total << " gold links):\n";
  for (std::size_t id = 1; id < histogram.size(); ++id) {
    const double share = total == 0 ? 0.0 : static_cast<double>(histogram[id]) / total;
    char line[96];
    std::snprintf(line, sizeof(line), "  %-14s %8ld  %6.2f%%\n",
                  prof.name_of(static_cast<LabelId>(id)).c_str(), histogram[id], share * 100.0);
    std::cout << line;
  }
}

int run(int argc, char** argv) {
  // The config file is resolved before CLI11 runs so that explicit flags can
  // override file values.
  std::string config_path = default_config_path();
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);

  CLI::App app{"temprel: joint arc+label temporal relation extraction"};
  app.require_subcommand(1);
  std::string config_flag;
  app.add_option("--config", config_flag, "JSON config file (default: $TEMPREL_CONFIG)");
  auto add_config_opt = [&](CLI::App* sub) {
    sub->add_option("--config", config_flag, "JSON config file (default: $TEMPREL_CONFIG)");
  };

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic annotated corpus");
  add_config_opt(synth);
  std::string synth_out;
  synth->add_option("--out", synth_out, "output corpus (jsonl)")->required();
  synth->add_option("--docs", cfg.synth_docs, "number of documents");
  synth->add_option("--profile", cfg.profile_name, "dataset profile");
  synth->add_option("--seed", cfg.seed, "generator seed");
  synth->add_option("--flip-prob", cfg.synth.flipped_annotation_prob,
                    "probability of storing a link in inverted form");
  synth->callback([&]() {
    const DatasetProfile& prof = profile(cfg.profile_name);
    auto docs = generate_synthetic(cfg.seed, cfg.synth_docs, prof, cfg.synth);
    store_corpus(synth_out, docs, prof);
    std::cout << "wrote " << docs.size() << " documents to " << synth_out << "\n";
  });

  // --- preprocess ----------------------------------------------------------
  auto* prep = app.add_subcommand("preprocess", "build windowed training instances");
  add_config_opt(prep);
  std::string prep_corpus, prep_out;
  prep->add_option("--corpus", prep_corpus, "input corpus (jsonl)")->required();
  prep->add_option("--out", prep_out, "output window file")->required();
  prep->add_option("--profile", cfg.profile_name, "dataset profile");
  prep->add_option("--seed", cfg.preprocess.seed, "negative sampling seed");
  prep->add_option("--max-window-len", cfg.preprocess.max_window_len,
                   "skip windows above this token count");
  prep->add_option("--negative-rate", cfg.preprocess.negative_sample_rate,
                   "sampling rate for non-gold cells");
  prep->callback([&]() {
    const DatasetProfile& prof = profile(cfg.profile_name);
    auto docs = load_corpus(prep_corpus, prof);
    PreprocessStats stats;
    auto windows = make_windows(docs, prof, cfg.preprocess, &stats);
    write_windows(prep_out, windows, prof);
    std::cout << "windows: " << stats.windows << " (" << stats.skipped_windows
              << " skipped over length cap)\n";
    std::cout << "dropped tlinks: " << stats.dropped_tlinks << "\n";
    print_histogram(prof, stats.label_histogram);
    std::cout << "wrote " << windows.size() << " windows to " << prep_out << "\n";
  });

  // --- train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_config_opt(train_cmd);
  std::string train_corpus, train_dev, train_windows_path, train_dev_windows, model_out;
  bool no_biaffine = false, no_arc = false;
  train_cmd->add_option("--out", model_out, "output checkpoint")->required();
  train_cmd->add_option("--corpus", train_corpus, "training corpus (jsonl)");
  train_cmd->add_option("--dev", train_dev, "dev corpus (jsonl)");
  train_cmd->add_option("--windows", train_windows_path, "preprocessed training windows");
  train_cmd->add_option("--dev-windows", train_dev_windows, "preprocessed dev windows");
  train_cmd->add_option("--profile", cfg.profile_name, "dataset profile");
  train_cmd->add_option("--seed", cfg.seed, "training seed");
  train_cmd->add_option("--epochs", cfg.epochs, "epoch count (default: profile-specific)");
  train_cmd->add_option("--lr", cfg.adam.lr, "learning rate");
  train_cmd->add_option("--dev-fraction", cfg.dev_fraction,
                        "document fraction held out when --dev is absent");
  train_cmd->add_option("--embed-dim", cfg.model.embed_dim, "embedding dimension");
  train_cmd->add_option("--lstm-hidden", cfg.model.lstm_hidden, "LSTM hidden size per direction");
  train_cmd->add_option("--lstm-layers", cfg.model.lstm_layers, "stacked LSTM layers");
  train_cmd->add_option("--mlp-dim", cfg.model.mlp_dim, "projection size");
  train_cmd->add_option("--dropout", cfg.model.dropout, "dropout probability");
  train_cmd->add_option("--embedding-mode", cfg.model.embedding_mode,
                        "trainable-lookup or external-vectors");
  train_cmd->add_option("--embeddings", cfg.embeddings_path,
                        "embedding table (external-vectors mode)");
  train_cmd->add_option("--loss-curve", cfg.loss_curve_path, "per-step loss TSV");
  train_cmd->add_flag("--no-biaffine", no_biaffine, "drop the bilinear term (affine scoring)");
  train_cmd->add_flag("--no-arc-module", no_arc, "ablate arcs; NONE becomes a label class");
  train_cmd->callback([&]() {
    if (no_biaffine) cfg.model.use_biaffine = false;
    if (no_arc) cfg.model.use_arc_module = false;
    if (train_corpus.empty() == train_windows_path.empty())
      throw UsageError("train: give exactly one of --corpus or --windows");
    const DatasetProfile& prof = profile(cfg.profile_name);
    TrainOptions topt;
    topt.epochs = cfg.resolved_epochs();
    topt.seed = cfg.seed;
    topt.dev_fraction = cfg.dev_fraction;
    topt.adam = cfg.adam;
    topt.preprocess = cfg.preprocess;
    topt.embeddings_path = cfg.embeddings_path;
    topt.loss_curve_path = cfg.loss_curve_path;
    auto on_epoch = [&](const EpochStats& s) {
      char line[160];
      if (s.dev_f1 >= 0)
        std::snprintf(line, sizeof(line),
                      "epoch %d: joint %.4f (arc %.4f rel %.4f) dev f1 %.4f lr %.3g\n", s.epoch,
                      s.mean_joint, s.mean_arc, s.mean_rel, s.dev_f1, s.lr);
      else
        std::snprintf(line, sizeof(line), "epoch %d: joint %.4f (arc %.4f rel %.4f) lr %.3g\n",
                      s.epoch, s.mean_joint, s.mean_arc, s.mean_rel, s.lr);
      std::cout << line << std::flush;
      return true;
    };
    TrainResult result = [&]() {
      if (!train_corpus.empty()) {
        auto docs = load_corpus(train_corpus, prof);
        std::vector<Document> dev;
        if (!train_dev.empty()) dev = load_corpus(train_dev, prof);
        return train(docs, dev, prof, cfg.model, topt, on_epoch);
      }
      auto windows = read_windows(train_windows_path, prof);
      std::vector<WindowInstance> dev;
      if (!train_dev_windows.empty()) dev = read_windows(train_dev_windows, prof);
      return train_windows(windows, dev, prof, cfg.model, topt, on_epoch);
    }();
    save_model(result.model, model_out);
    if (result.best_epoch >= 0) {
      char line[160];
      std::snprintf(line, sizeof(line), "saved %s (best dev f1 %.4f at epoch %d)\n",
                    model_out.c_str(), result.best_dev_f1, result.best_epoch);
      std::cout << line;
    } else {
      std::cout << "saved " << model_out << "\n";
    }
  });

  // --- predict ---------------------------------------------------------------
  auto* predict_cmd = app.add_subcommand("predict", "decode relations for a corpus");
  add_config_opt(predict_cmd);
  std::string predict_model, predict_input, predict_out;
  bool predict_raw_flag = false;
  predict_cmd->add_option("--model", predict_model, "checkpoint")->required();
  predict_cmd->add_option("--input", predict_input, "input corpus (jsonl)")->required();
  predict_cmd->add_option("--out", predict_out, "output predictions (jsonl)")->required();
  predict_cmd->add_option("--workers", cfg.workers, "worker threads");
  predict_cmd->add_option("--embeddings", cfg.embeddings_path,
                          "embedding table (external-vectors mode)");
  predict_cmd->add_flag("--raw", predict_raw_flag, "ignore events/tlinks in the input");
  predict_cmd->callback([&]() {
    BiaffineModel<float> model = load_model(predict_model);
    if (model.config().embedding_mode == "external-vectors") {
      if (cfg.embeddings_path.empty())
        throw UsageError("this checkpoint needs --embeddings (external-vectors mode)");
      model.set_external_embeddings(load_embeddings(cfg.embeddings_path));
    }
    PredictionOptions popt;
    popt.preprocess = cfg.preprocess;
    popt.workers = cfg.workers;
    std::vector<DocPrediction> preds;
    if (predict_raw_flag) {
      preds = predict_raw(model, load_raw(predict_input), popt);
    } else {
      preds = predict_docs(model, load_corpus(predict_input, model.profile()), popt);
    }
    long skipped = 0, edges = 0;
    for (const auto& p : preds) {
      skipped += p.skipped_windows;
      edges += static_cast<long>(p.edges.size());
      if (p.skipped_windows > 0)
        std::cerr << "warning: " << p.doc_id << ": skipped " << p.skipped_windows
                  << " windows over the length cap\n";
    }
    write_predictions(predict_out, preds, model.profile());
    std::cout << "predicted " << edges << " token-level edges over " << preds.size()
              << " documents (" << skipped << " windows skipped)\n";
  });

  // --- eval ------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
  add_config_opt(eval_cmd);
  std::string eval_gold, eval_pred, eval_tsv;
  eval_cmd->add_option("--gold", eval_gold, "gold corpus (jsonl)")->required();
  eval_cmd->add_option("--pred", eval_pred, "prediction file (jsonl)")->required();
  eval_cmd->add_option("--profile", cfg.profile_name, "dataset profile");
  eval_cmd->add_option("--tsv", eval_tsv, "also write the report as TSV");
  eval_cmd->callback([&]() {
    const DatasetProfile& prof = profile(cfg.profile_name);
    auto gold = corpus_event_pairs(load_corpus(eval_gold, prof));
    auto pred = prediction_event_pairs(read_predictions(eval_pred, prof));
    EvalReport report = evaluate(gold, pred, prof);
    std::cout << format_report(report);
    if (!eval_tsv.empty()) {
      std::ofstream out(eval_tsv);
      if (!out) throw DataError("cannot write report: " + eval_tsv);
      out << report_tsv(report);
    }
  });

  // --- bench -----------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "measure inference throughput");
  add_config_opt(bench_cmd);
  std::string bench_model, bench_input, bench_json_path;
  bench_cmd->add_option("--model", bench_model, "checkpoint")->required();
  bench_cmd->add_option("--input", bench_input, "input corpus (jsonl)")->required();
  bench_cmd->add_option("--repetitions", cfg.bench_repetitions, "timed repetitions");
  bench_cmd->add_option("--workers", cfg.workers, "worker threads");
  bench_cmd->add_option("--embeddings", cfg.embeddings_path,
                        "embedding table (external-vectors mode)");
  bench_cmd->add_option("--json", bench_json_path, "also write the report as JSON");
  bench_cmd->callback([&]() {
    BiaffineModel<float> model = load_model(bench_model);
    if (model.config().embedding_mode == "external-vectors") {
      if (cfg.embeddings_path.empty())
        throw UsageError("this checkpoint needs --embeddings (external-vectors mode)");
      model.set_external_embeddings(load_embeddings(cfg.embeddings_path));
    }
    BenchOptions bopt;
    bopt.repetitions = cfg.bench_repetitions;
    bopt.workers = cfg.workers;
    bopt.preprocess = cfg.preprocess;
    BenchReport report = run_bench(model, load_raw(bench_input), bopt);
    std::cout << format_bench(report);
    if (!bench_json_path.empty()) {
      std::ofstream out(bench_json_path);
      if (!out) throw DataError("cannot write report: " + bench_json_path);
      out << bench_json(report) << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const temprel::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const temprel::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
