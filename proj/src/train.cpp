#include "temprel/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "temprel/decode.hpp"

namespace temprel {

EvalReport evaluate_windows(const BiaffineModel<float>& model,
                            const std::vector<WindowInstance>& windows) {
  PairLabelMap gold, pred;
  for (const auto& w : windows) {
    auto add_all = [&](PairLabelMap& into, const PairLabelMap& from) {
      // emplace keeps the first window's verdict for pairs shared by
      // overlapping windows.
      for (const auto& [key, label] : from)
        into.emplace(std::make_pair(w.doc_id + "#" + key.first, w.doc_id + "#" + key.second),
                     label);
    };
    add_all(gold, event_level(gold_graph(w), w.event_first_tokens));
    add_all(pred, event_level(decode(model.score(w.tokens)), w.event_first_tokens));
  }
  return evaluate(gold, pred, model.profile());
}

namespace {

struct ParamSnapshot {
  std::vector<Mat<float>> values;

  static ParamSnapshot take(const BiaffineModel<float>& model) {
    ParamSnapshot s;
    s.values.reserve(model.params().size());
    for (const auto& p : model.params()) s.values.push_back(p.var.value());
    return s;
  }
  void restore(BiaffineModel<float>& model) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      model.params()[i].var.mutable_value() = values[i];
  }
};

}  // namespace

TrainResult train_windows(const std::vector<WindowInstance>& train_set,
                          const std::vector<WindowInstance>& dev_set,
                          const DatasetProfile& prof, const ModelConfig& mcfg,
                          const TrainOptions& topt, const EpochCallback& cb) {
  if (train_set.empty()) throw DataError("training requires at least one window");
  if (topt.epochs < 1) throw UsageError("epochs must be positive");

  Vocab vocab = Vocab::build(train_set);
  BiaffineModel<float> model(mcfg, prof, std::move(vocab), topt.seed);
  if (mcfg.embedding_mode == "external-vectors") {
    if (topt.embeddings_path.empty())
      throw UsageError("external-vectors mode requires an embedding file");
    model.set_external_embeddings(load_embeddings(topt.embeddings_path));
  }
  Adam<float> adam(topt.adam);

  std::ofstream curve;
  if (!topt.loss_curve_path.empty()) {
    curve.open(topt.loss_curve_path);
    if (!curve) throw DataError("cannot write loss curve: " + topt.loss_curve_path);
    curve << "step\tepoch\tarc\trel\tjoint\tlr\tgrad_norm\n";
  }

  TrainResult result{std::move(model), {}, -1, -1, 0, 0};
  ParamSnapshot best = ParamSnapshot::take(result.model);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool arc_active = mcfg.use_arc_module;
  long global_step = 0;
  for (int epoch = 0; epoch < topt.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(topt.seed, "epoch-shuffle", static_cast<std::uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    double sum_arc = 0, sum_rel = 0, sum_joint = 0;
    long steps_this_epoch = 0;
    for (std::size_t idx : order) {
      const WindowInstance& w = train_set[idx];
      const bool has_mask = w.loss_mask.any();
      const bool has_pairs =
          !rel_training_rows(w, !arc_active).first.empty() || (arc_active && has_mask);
      if (!has_pairs || (arc_active && !has_mask)) {
        ++result.skipped_windows;
        continue;
      }

      Tape<float> tape(true);
      Rng drop_rng(derive_seed(topt.seed, "dropout", static_cast<std::uint64_t>(global_step)));
      auto fwd = result.model.forward(tape, w.tokens, drop_rng, true);
      Var<float> arc_part;
      if (arc_active) arc_part = arc_loss(tape, fwd.s_arc, w);
      Var<float> rel_part = rel_loss(tape, fwd.s_rel, w, !arc_active);
      Var<float> loss = joint_loss(tape, arc_part, rel_part);
      if (!std::isfinite(static_cast<double>(loss.scalar())))
        throw TensorError("training diverged: non-finite loss at step " +
                          std::to_string(global_step));
      if (!loss.requires_grad()) {
        ++result.skipped_windows;
        continue;
      }

      zero_grads(result.model.params());
      tape.backward(loss);
      const double lr_now = adam.current_lr();
      adam.step(result.model.params());

      const double arc_v = arc_part.defined() ? static_cast<double>(arc_part.scalar()) : 0.0;
      const double rel_v = rel_part.defined() ? static_cast<double>(rel_part.scalar()) : 0.0;
      sum_arc += arc_v;
      sum_rel += rel_v;
      sum_joint += static_cast<double>(loss.scalar());
      ++steps_this_epoch;
      ++global_step;
      if (curve.is_open())
        curve << global_step << '\t' << epoch << '\t' << arc_v << '\t' << rel_v << '\t'
              << static_cast<double>(loss.scalar()) << '\t' << lr_now << '\t'
              << adam.last_grad_norm() << '\n';
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.steps = steps_this_epoch;
    stats.lr = adam.current_lr();
    if (steps_this_epoch > 0) {
      stats.mean_arc = sum_arc / steps_this_epoch;
      stats.mean_rel = sum_rel / steps_this_epoch;
      stats.mean_joint = sum_joint / steps_this_epoch;
    }
    if (!dev_set.empty()) {
      EvalReport dev = evaluate_windows(result.model, dev_set);
      stats.dev_precision = dev.precision;
      stats.dev_recall = dev.recall;
      stats.dev_f1 = dev.f1;
      if (dev.f1 > result.best_dev_f1) {
        result.best_dev_f1 = dev.f1;
        result.best_epoch = epoch;
        best = ParamSnapshot::take(result.model);
      }
    }
    result.epochs.push_back(stats);
    if (cb && !cb(stats)) break;
  }
  result.total_steps = global_step;
  if (!dev_set.empty() && result.best_epoch >= 0) best.restore(result.model);
  return result;
}

TrainResult train(const std::vector<Document>& docs, const std::vector<Document>& dev_docs,
                  const DatasetProfile& prof, const ModelConfig& mcfg, const TrainOptions& topt,
                  const EpochCallback& cb) {
  if (docs.empty()) throw DataError("training corpus is empty");
  std::vector<Document> train_docs = docs;
  std::vector<Document> dev = dev_docs;
  if (dev.empty() && topt.dev_fraction > 0 && train_docs.size() > 1) {
    Rng rng(derive_seed(topt.seed, "dev-split", 0));
    shuffle(train_docs, rng);
    auto n_dev = static_cast<std::size_t>(
        std::ceil(topt.dev_fraction * static_cast<double>(train_docs.size())));
    n_dev = std::min(n_dev, train_docs.size() - 1);
    dev.assign(train_docs.end() - static_cast<std::ptrdiff_t>(n_dev), train_docs.end());
    train_docs.resize(train_docs.size() - n_dev);
  }
  PreprocessStats pstats;
  std::vector<WindowInstance> train_set =
      make_windows(train_docs, prof, topt.preprocess, &pstats);
  std::vector<WindowInstance> dev_set = make_windows(dev, prof, topt.preprocess, &pstats);
  return train_windows(train_set, dev_set, prof, mcfg, topt, cb);
}

}  // namespace temprel
