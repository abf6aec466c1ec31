#pragma once

#include <cmath>
#include <unordered_map>
#include <utility>
#include <vector>

#include "temprel/preprocess.hpp"
#include "temprel/tensor.hpp"

namespace temprel {

/// Mean binary cross-entropy over the sampled cells of the arc plane.
template <class Scalar>
Var<Scalar> arc_loss(Tape<Scalar>& tape, const Var<Scalar>& s_arc, const WindowInstance& w) {
  if (!w.loss_mask.any()) throw DataError("arc_loss: loss mask selects no cells");
  return binary_cross_entropy_logits(tape, s_arc, w.arc_gold, w.loss_mask);
}

/// Flat row indices and target columns for the rel objective.
///
/// With the arc module active, supervision covers gold pairs only (upper
/// triangle) and NONE has no column: target = label id - 1. With the arc
/// module ablated, NONE takes column 0 and the sampled negative cells join
/// the gold pairs as NONE-labelled examples.
inline std::pair<std::vector<int>, std::vector<int>> rel_training_rows(
    const WindowInstance& w, bool labels_include_none) {
  std::vector<int> rows_, targets;
  const int n = w.n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const LabelId gold = w.rel_gold(i, j);
      if (labels_include_none) {
        if (gold == kNoneLabel && !w.loss_mask(i, j) && !w.loss_mask(j, i)) continue;
        rows_.push_back(static_cast<int>(pair_index(i, j, n)));
        targets.push_back(gold);
      } else {
        if (gold == kNoneLabel) continue;
        rows_.push_back(static_cast<int>(pair_index(i, j, n)));
        targets.push_back(gold - 1);
      }
    }
  }
  return {std::move(rows_), std::move(targets)};
}

/// Mean softmax cross-entropy over the selected pair rows; zero (constant)
/// when the window contributes no labelled pairs.
template <class Scalar>
Var<Scalar> rel_loss(Tape<Scalar>& tape, const Var<Scalar>& s_rel, const WindowInstance& w,
                     bool labels_include_none) {
  auto [row_ids, targets] = rel_training_rows(w, labels_include_none);
  if (row_ids.empty()) return Var<Scalar>::constant(Mat<Scalar>::Zero(1, 1));
  for (int t : targets)
    if (t >= s_rel.cols()) throw DataError("rel_loss: gold label outside scorer range");
  Var<Scalar> picked = gather_rows(tape, s_rel, std::move(row_ids));
  return softmax_cross_entropy(tape, picked, targets);
}

/// The two modules train jointly on the sum of their losses.
template <class Scalar>
Var<Scalar> joint_loss(Tape<Scalar>& tape, const Var<Scalar>& arc_part,
                       const Var<Scalar>& rel_part) {
  if (!arc_part.defined()) return rel_part;
  if (!rel_part.defined()) return arc_part;
  if (!arc_part.requires_grad() && !rel_part.requires_grad())
    return Var<Scalar>::constant(arc_part.value() + rel_part.value());
  if (!arc_part.requires_grad())
    return tape.emit("joint_loss", Mat<Scalar>(arc_part.value() + rel_part.value()), true,
                     [rn = rel_part.node()](TensorNode<Scalar>* out) {
                       return [rn, out]() { rn->accumulate(out->grad); };
                     });
  if (!rel_part.requires_grad())
    return tape.emit("joint_loss", Mat<Scalar>(arc_part.value() + rel_part.value()), true,
                     [an = arc_part.node()](TensorNode<Scalar>* out) {
                       return [an, out]() { an->accumulate(out->grad); };
                     });
  return add(tape, arc_part, rel_part);
}

struct AdamConfig {
  double lr = 5e-5;
  double mu = 0.9;        // first-moment decay
  double nu = 0.9;        // second-moment decay
  double epsilon = 1e-12;
  double clip_norm = 5.0;       // global norm; <= 0 disables clipping
  double decay = 0.75;          // lr multiplier applied every decay_interval steps
  long decay_interval = 5000;

  void validate() const {
    if (lr <= 0) throw UsageError("lr must be positive");
    if (mu < 0 || mu >= 1 || nu < 0 || nu >= 1)
      throw UsageError("adam decay rates must lie in [0,1)");
    if (epsilon <= 0) throw UsageError("epsilon must be positive");
    if (decay <= 0 || decay > 1) throw UsageError("lr decay must lie in (0,1]");
    if (decay_interval < 1) throw UsageError("decay_interval must be positive");
  }
};

/// Adam with bias correction, global-norm gradient clipping (applied before
/// the moment update) and stepwise learning-rate decay.
template <class Scalar>
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const AdamConfig& config() const { return cfg_; }
  long steps() const { return t_; }
  double current_lr() const {
    return cfg_.lr * std::pow(cfg_.decay, static_cast<double>(t_ / cfg_.decay_interval));
  }
  /// Global gradient norm observed in the most recent step, before clipping.
  double last_grad_norm() const { return last_norm_; }

  void step(std::vector<NamedParam<Scalar>>& params) {
    last_norm_ = global_grad_norm(params);
    if (cfg_.clip_norm > 0 && last_norm_ > cfg_.clip_norm) {
      const Scalar scale = static_cast<Scalar>(cfg_.clip_norm / last_norm_);
      for (auto& p : params)
        if (p.var.grad().size() != 0) p.var.node()->grad *= scale;
    }
    const double lr_t = current_lr();
    t_ += 1;
    const double bc1 = 1.0 - std::pow(cfg_.mu, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.nu, static_cast<double>(t_));
    for (auto& p : params) {
      if (p.var.grad().size() == 0) continue;
      auto& slot = moments_[p.name];
      if (slot.m.size() == 0) {
        slot.m = Mat<Scalar>::Zero(p.var.rows(), p.var.cols());
        slot.v = Mat<Scalar>::Zero(p.var.rows(), p.var.cols());
      }
      const auto& g = p.var.grad();
      slot.m = static_cast<Scalar>(cfg_.mu) * slot.m + static_cast<Scalar>(1.0 - cfg_.mu) * g;
      slot.v = static_cast<Scalar>(cfg_.nu) * slot.v.array().matrix() +
               static_cast<Scalar>(1.0 - cfg_.nu) * g.array().square().matrix();
      p.var.mutable_value().array() -=
          static_cast<Scalar>(lr_t) * (slot.m.array() / static_cast<Scalar>(bc1)) /
          ((slot.v.array() / static_cast<Scalar>(bc2)).sqrt() + static_cast<Scalar>(cfg_.epsilon));
    }
  }

 private:
  struct Moments {
    Mat<Scalar> m, v;
  };
  AdamConfig cfg_;
  long t_ = 0;
  double last_norm_ = 0.0;
  std::unordered_map<std::string, Moments> moments_;
};

}  // namespace temprel
