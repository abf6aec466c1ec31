#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "temprel/errors.hpp"
#include "temprel/rng.hpp"

namespace temprel {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Every forward op validates that its output is finite unless disabled
/// (e.g. inside tight benchmark loops).
inline bool& finite_checks_flag() {
  static bool enabled = true;
  return enabled;
}
inline void set_finite_checks(bool enabled) { finite_checks_flag() = enabled; }

template <class Scalar>
struct TensorNode {
  Mat<Scalar> value;
  Mat<Scalar> grad;  // lazily allocated
  bool requires_grad = false;
  std::function<void()> backward;

  void ensure_grad() {
    if (grad.size() == 0) grad = Mat<Scalar>::Zero(value.rows(), value.cols());
  }
  void accumulate(const Mat<Scalar>& delta) {
    if (!requires_grad) return;
    ensure_grad();
    grad += delta;
  }
};

/// Value-semantic handle to a node in the computation graph.
template <class Scalar>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<TensorNode<Scalar>> n) : node_(std::move(n)) {}

  static Var parameter(Mat<Scalar> value) {
    auto n = std::make_shared<TensorNode<Scalar>>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Var(std::move(n));
  }
  static Var constant(Mat<Scalar> value) {
    auto n = std::make_shared<TensorNode<Scalar>>();
    n->value = std::move(value);
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Mat<Scalar>& value() const { return node_->value; }
  Mat<Scalar>& mutable_value() { return node_->value; }
  const Mat<Scalar>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  Scalar scalar() const {
    if (size() != 1) throw TensorError("scalar() on non-scalar tensor");
    return node_->value(0, 0);
  }
  void zero_grad() {
    if (node_) node_->grad.resize(0, 0);
  }

  std::shared_ptr<TensorNode<Scalar>>& node() { return node_; }
  const std::shared_ptr<TensorNode<Scalar>>& node() const { return node_; }

 private:
  std::shared_ptr<TensorNode<Scalar>> node_;
};

/// Records forward operations; backward() replays them exactly reversed.
/// One tape per training step / per inference thread.
template <class Scalar>
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return order_.size(); }

  /// Wraps a computed value. `build_backward` is invoked (with the output
  /// node) only when gradients flow from any input.
  template <class BackwardBuilder>
  Var<Scalar> emit(const char* op, Mat<Scalar> value, bool inputs_require_grad,
                   BackwardBuilder&& build_backward) {
    if (finite_checks_flag() && !value.allFinite())
      throw TensorError(std::string("non-finite value produced by op '") + op + "'");
    auto n = std::make_shared<TensorNode<Scalar>>();
    n->value = std::move(value);
    if (grad_enabled_ && inputs_require_grad) {
      n->requires_grad = true;
      n->backward = build_backward(n.get());
      order_.push_back(n);
    }
    return Var<Scalar>(std::move(n));
  }

  /// Seeds d(loss)/d(loss) = 1 and traverses the recorded order in reverse.
  void backward(const Var<Scalar>& loss) {
    if (!loss.defined() || loss.size() != 1) throw TensorError("backward: loss must be scalar");
    if (!loss.requires_grad())
      throw TensorError("backward: loss is detached from the recorded graph");
    loss.node()->ensure_grad();
    loss.node()->grad(0, 0) = Scalar(1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      auto& node = **it;
      if (node.backward && node.grad.size() != 0) node.backward();
    }
  }

 private:
  bool grad_enabled_;
  std::vector<std::shared_ptr<TensorNode<Scalar>>> order_;
};

namespace detail {

template <class Scalar>
void require(bool cond, const char* what) {
  if (!cond) throw TensorError(what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and structural ops
// ---------------------------------------------------------------------------

template <class Scalar>
Var<Scalar> matmul(Tape<Scalar>& tape, const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require<Scalar>(a.cols() == b.rows(), "matmul: inner extents disagree");
  Mat<Scalar> v = a.value() * b.value();
  return tape.emit("matmul", std::move(v), a.requires_grad() || b.requires_grad(),
                   [an = a.node(), bn = b.node()](TensorNode<Scalar>* out) {
                     return [an, bn, out]() {
                       if (an->requires_grad) an->accumulate(out->grad * bn->value.transpose());
                       if (bn->requires_grad) bn->accumulate(an->value.transpose() * out->grad);
                     };
                   });
}

template <class Scalar>
Var<Scalar> add(Tape<Scalar>& tape, const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require<Scalar>(a.rows() == b.rows() && a.cols() == b.cols(),
                          "add: shape mismatch");
  Mat<Scalar> v = a.value() + b.value();
  return tape.emit("add", std::move(v), a.requires_grad() || b.requires_grad(),
                   [an = a.node(), bn = b.node()](TensorNode<Scalar>* out) {
                     return [an, bn, out]() {
                       an->accumulate(out->grad);
                       bn->accumulate(out->grad);
                     };
                   });
}

/// m + column vector b broadcast across columns.
template <class Scalar>
Var<Scalar> add_bias(Tape<Scalar>& tape, const Var<Scalar>& m, const Var<Scalar>& b) {
  detail::require<Scalar>(b.cols() == 1 && m.rows() == b.rows(), "add_bias: shape mismatch");
  Mat<Scalar> v = m.value().colwise() + Vec<Scalar>(b.value());
  return tape.emit("add_bias", std::move(v), m.requires_grad() || b.requires_grad(),
                   [mn = m.node(), bn = b.node()](TensorNode<Scalar>* out) {
                     return [mn, bn, out]() {
                       mn->accumulate(out->grad);
                       bn->accumulate(out->grad.rowwise().sum());
                     };
                   });
}

template <class Scalar>
Var<Scalar> mul(Tape<Scalar>& tape, const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require<Scalar>(a.rows() == b.rows() && a.cols() == b.cols(),
                          "mul: shape mismatch");
  Mat<Scalar> v = a.value().cwiseProduct(b.value());
  return tape.emit("mul", std::move(v), a.requires_grad() || b.requires_grad(),
                   [an = a.node(), bn = b.node()](TensorNode<Scalar>* out) {
                     return [an, bn, out]() {
                       if (an->requires_grad) an->accumulate(out->grad.cwiseProduct(bn->value));
                       if (bn->requires_grad) bn->accumulate(out->grad.cwiseProduct(an->value));
                     };
                   });
}

template <class Scalar>
Var<Scalar> scale(Tape<Scalar>& tape, const Var<Scalar>& a, Scalar s) {
  Mat<Scalar> v = a.value() * s;
  return tape.emit("scale", std::move(v), a.requires_grad(),
                   [an = a.node(), s](TensorNode<Scalar>* out) {
                     return [an, s, out]() { an->accumulate(out->grad * s); };
                   });
}

template <class Scalar>
Var<Scalar> sigmoid(Tape<Scalar>& tape, const Var<Scalar>& a) {
  // 1/(1+exp(-x)) evaluated branchlessly; stable for large |x|.
  Mat<Scalar> v =
      (Scalar(0.5) * (a.value().array() * Scalar(0.5)).tanh() + Scalar(0.5)).matrix();
  return tape.emit("sigmoid", std::move(v), a.requires_grad(),
                   [an = a.node()](TensorNode<Scalar>* out) {
                     return [an, out]() {
                       an->accumulate(out->grad.cwiseProduct(
                           (out->value.array() * (Scalar(1) - out->value.array())).matrix()));
                     };
                   });
}

template <class Scalar>
Var<Scalar> tanh(Tape<Scalar>& tape, const Var<Scalar>& a) {
  Mat<Scalar> v = a.value().array().tanh().matrix();
  return tape.emit("tanh", std::move(v), a.requires_grad(),
                   [an = a.node()](TensorNode<Scalar>* out) {
                     return [an, out]() {
                       an->accumulate(out->grad.cwiseProduct(
                           (Scalar(1) - out->value.array().square()).matrix()));
                     };
                   });
}

/// Inverted dropout: retained activations are scaled by 1/(1-p) so eval mode
/// is the identity.
template <class Scalar>
Var<Scalar> dropout(Tape<Scalar>& tape, const Var<Scalar>& a, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw UsageError("dropout: probability must lie in [0,1)");
  if (!training || p == 0.0) return a;
  Mat<Scalar> mask(a.rows(), a.cols());
  const Scalar keep_scale = Scalar(1.0 / (1.0 - p));
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      mask(i, j) = bernoulli(rng, p) ? Scalar(0) : keep_scale;
  Mat<Scalar> v = a.value().cwiseProduct(mask);
  return tape.emit("dropout", std::move(v), a.requires_grad(),
                   [an = a.node(), mask](TensorNode<Scalar>* out) {
                     return [an, mask, out]() { an->accumulate(out->grad.cwiseProduct(mask)); };
                   });
}

template <class Scalar>
Var<Scalar> rows(Tape<Scalar>& tape, const Var<Scalar>& a, Eigen::Index r0, Eigen::Index count) {
  detail::require<Scalar>(r0 >= 0 && r0 + count <= a.rows(), "rows: slice out of range");
  Mat<Scalar> v = a.value().middleRows(r0, count);
  return tape.emit("rows", std::move(v), a.requires_grad(),
                   [an = a.node(), r0, count](TensorNode<Scalar>* out) {
                     return [an, r0, count, out]() {
                       if (!an->requires_grad) return;
                       an->ensure_grad();
                       an->grad.middleRows(r0, count) += out->grad;
                     };
                   });
}

template <class Scalar>
Var<Scalar> col(Tape<Scalar>& tape, const Var<Scalar>& a, Eigen::Index j) {
  detail::require<Scalar>(j >= 0 && j < a.cols(), "col: index out of range");
  Mat<Scalar> v = a.value().col(j);
  return tape.emit("col", std::move(v), a.requires_grad(),
                   [an = a.node(), j](TensorNode<Scalar>* out) {
                     return [an, j, out]() {
                       if (!an->requires_grad) return;
                       an->ensure_grad();
                       an->grad.col(j) += out->grad;
                     };
                   });
}

/// Concatenates same-height blocks left to right.
template <class Scalar>
Var<Scalar> hstack(Tape<Scalar>& tape, const std::vector<Var<Scalar>>& parts) {
  detail::require<Scalar>(!parts.empty(), "hstack: no inputs");
  Eigen::Index rows_ = parts.front().rows(), cols_ = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    detail::require<Scalar>(p.rows() == rows_, "hstack: row mismatch");
    cols_ += p.cols();
    any_grad = any_grad || p.requires_grad();
  }
  Mat<Scalar> v(rows_, cols_);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<std::shared_ptr<TensorNode<Scalar>>> nodes;
  nodes.reserve(parts.size());
  for (const auto& p : parts) nodes.push_back(p.node());
  return tape.emit("hstack", std::move(v), any_grad, [nodes](TensorNode<Scalar>* out) {
    return [nodes, out]() {
      Eigen::Index at = 0;
      for (const auto& n : nodes) {
        if (n->requires_grad) {
          n->ensure_grad();
          n->grad += out->grad.middleCols(at, n->value.cols());
        }
        at += n->value.cols();
      }
    };
  });
}

/// Stacks a on top of b.
template <class Scalar>
Var<Scalar> vstack(Tape<Scalar>& tape, const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require<Scalar>(a.cols() == b.cols(), "vstack: column mismatch");
  Mat<Scalar> v(a.rows() + b.rows(), a.cols());
  v.topRows(a.rows()) = a.value();
  v.bottomRows(b.rows()) = b.value();
  return tape.emit("vstack", std::move(v), a.requires_grad() || b.requires_grad(),
                   [an = a.node(), bn = b.node()](TensorNode<Scalar>* out) {
                     return [an, bn, out]() {
                       if (an->requires_grad) {
                         an->ensure_grad();
                         an->grad += out->grad.topRows(an->value.rows());
                       }
                       if (bn->requires_grad) {
                         bn->ensure_grad();
                         bn->grad += out->grad.bottomRows(bn->value.rows());
                       }
                     };
                   });
}

template <class Scalar>
Var<Scalar> reshape(Tape<Scalar>& tape, const Var<Scalar>& a, Eigen::Index r, Eigen::Index c) {
  detail::require<Scalar>(a.size() == r * c, "reshape: size mismatch");
  Mat<Scalar> v = Eigen::Map<const Mat<Scalar>>(a.value().data(), r, c);
  return tape.emit("reshape", std::move(v), a.requires_grad(),
                   [an = a.node()](TensorNode<Scalar>* out) {
                     return [an, out]() {
                       an->accumulate(Eigen::Map<const Mat<Scalar>>(
                           out->grad.data(), an->value.rows(), an->value.cols()));
                     };
                   });
}

/// Picks columns of m by index (with repetition allowed); backward
/// scatter-adds. Used for embedding lookup.
template <class Scalar>
Var<Scalar> gather_cols(Tape<Scalar>& tape, const Var<Scalar>& m, std::vector<int> ids) {
  for (int id : ids)
    detail::require<Scalar>(id >= 0 && id < m.cols(), "gather_cols: index out of range");
  Mat<Scalar> v(m.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) v.col(k) = m.value().col(ids[k]);
  return tape.emit("gather_cols", std::move(v), m.requires_grad(),
                   [mn = m.node(), ids = std::move(ids)](TensorNode<Scalar>* out) {
                     return [mn, ids, out]() {
                       if (!mn->requires_grad) return;
                       mn->ensure_grad();
                       for (std::size_t k = 0; k < ids.size(); ++k)
                         mn->grad.col(ids[k]) += out->grad.col(static_cast<Eigen::Index>(k));
                     };
                   });
}

template <class Scalar>
Var<Scalar> gather_rows(Tape<Scalar>& tape, const Var<Scalar>& m, std::vector<int> ids) {
  for (int id : ids)
    detail::require<Scalar>(id >= 0 && id < m.rows(), "gather_rows: index out of range");
  Mat<Scalar> v(static_cast<Eigen::Index>(ids.size()), m.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) v.row(k) = m.value().row(ids[k]);
  return tape.emit("gather_rows", std::move(v), m.requires_grad(),
                   [mn = m.node(), ids = std::move(ids)](TensorNode<Scalar>* out) {
                     return [mn, ids, out]() {
                       if (!mn->requires_grad) return;
                       mn->ensure_grad();
                       for (std::size_t k = 0; k < ids.size(); ++k)
                         mn->grad.row(ids[k]) += out->grad.row(static_cast<Eigen::Index>(k));
                     };
                   });
}

template <class Scalar>
Var<Scalar> sum(Tape<Scalar>& tape, const Var<Scalar>& a) {
  // Double accumulation keeps analytic loss identities tight in float mode.
  double total = a.value().template cast<double>().sum();
  Mat<Scalar> v(1, 1);
  v(0, 0) = static_cast<Scalar>(total);
  return tape.emit("sum", std::move(v), a.requires_grad(),
                   [an = a.node()](TensorNode<Scalar>* out) {
                     return [an, out]() {
                       an->accumulate(Mat<Scalar>::Constant(an->value.rows(), an->value.cols(),
                                                            out->grad(0, 0)));
                     };
                   });
}

// ---------------------------------------------------------------------------
// Pair scoring: the two halves of the biaffine operator.
//
// Token features live in columns: X, Y are d x n with one column per token.
// Pair scores use flat layout (n*n) x L with flat index i + j*n for the
// ordered pair (i, j), i.e. column-major over an n x n score plane.
// ---------------------------------------------------------------------------

inline Eigen::Index pair_index(int i, int j, int n) {
  return static_cast<Eigen::Index>(i) + static_cast<Eigen::Index>(j) * n;
}

/// out(i + j*n, k) = x_i^T U_k y_j, with U stored as d x (L*d), block k at
/// columns [k*d, (k+1)*d).
template <class Scalar>
Var<Scalar> bilinear(Tape<Scalar>& tape, const Var<Scalar>& x, const Var<Scalar>& u,
                     const Var<Scalar>& y, int label_count) {
  const Eigen::Index d = x.rows(), n = x.cols();
  detail::require<Scalar>(label_count >= 1, "bilinear: label_count must be >= 1");
  detail::require<Scalar>(y.rows() == d && y.cols() == n, "bilinear: x/y shape mismatch");
  detail::require<Scalar>(u.rows() == d && u.cols() == d * label_count,
                          "bilinear: U extents disagree");
  Mat<Scalar> flat(n * n, label_count);
  for (int k = 0; k < label_count; ++k) {
    Mat<Scalar> plane = x.value().transpose() * u.value().middleCols(k * d, d) * y.value();
    flat.col(k) = Eigen::Map<const Vec<Scalar>>(plane.data(), n * n);
  }
  const bool needs_grad = x.requires_grad() || u.requires_grad() || y.requires_grad();
  return tape.emit(
      "bilinear", std::move(flat), needs_grad,
      [xn = x.node(), un = u.node(), yn = y.node(), d, n, label_count](TensorNode<Scalar>* out) {
        return [xn, un, yn, d, n, label_count, out]() {
          for (int k = 0; k < label_count; ++k) {
            Eigen::Map<const Mat<Scalar>> g(out->grad.col(k).data(), n, n);
            const auto uk = un->value.middleCols(k * d, d);
            if (xn->requires_grad) {
              xn->ensure_grad();
              xn->grad.noalias() += uk * yn->value * g.transpose();
            }
            if (un->requires_grad) {
              un->ensure_grad();
              un->grad.middleCols(k * d, d).noalias() += xn->value * g * yn->value.transpose();
            }
            if (yn->requires_grad) {
              yn->ensure_grad();
              yn->grad.noalias() += uk.transpose() * xn->value * g;
            }
          }
        };
      });
}

/// out(i + j*n, k) = W_k . concat(x_i, y_j) + b_k with W of shape L x 2d.
template <class Scalar>
Var<Scalar> concat_linear(Tape<Scalar>& tape, const Var<Scalar>& x, const Var<Scalar>& y,
                          const Var<Scalar>& w, const Var<Scalar>& b) {
  const Eigen::Index d = x.rows(), n = x.cols();
  const Eigen::Index label_count = w.rows();
  detail::require<Scalar>(y.rows() == d && y.cols() == n, "concat_linear: x/y shape mismatch");
  detail::require<Scalar>(w.cols() == 2 * d, "concat_linear: W must have 2d columns");
  detail::require<Scalar>(b.rows() == label_count && b.cols() == 1,
                          "concat_linear: bias extents disagree");
  Mat<Scalar> dep_part = w.value().leftCols(d) * x.value();    // L x n, indexed by i
  Mat<Scalar> head_part = w.value().rightCols(d) * y.value();  // L x n, indexed by j
  Mat<Scalar> flat(n * n, label_count);
  for (Eigen::Index k = 0; k < label_count; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      flat.col(k).segment(j * n, n) =
          dep_part.row(k).transpose().array() + head_part(k, j) + b.value()(k, 0);
  const bool needs_grad =
      x.requires_grad() || y.requires_grad() || w.requires_grad() || b.requires_grad();
  return tape.emit(
      "concat_linear", std::move(flat), needs_grad,
      [xn = x.node(), yn = y.node(), wn = w.node(), bn = b.node(), d, n,
       label_count](TensorNode<Scalar>* out) {
        return [xn, yn, wn, bn, d, n, label_count, out]() {
          Mat<Scalar> d_dep(label_count, n);   // d(loss)/d(dep_part)
          Mat<Scalar> d_head(label_count, n);  // d(loss)/d(head_part)
          for (Eigen::Index k = 0; k < label_count; ++k) {
            Eigen::Map<const Mat<Scalar>> g(out->grad.col(k).data(), n, n);
            d_dep.row(k) = g.rowwise().sum().transpose();
            d_head.row(k) = g.colwise().sum();
          }
          if (bn->requires_grad) bn->accumulate(d_dep.rowwise().sum());
          if (wn->requires_grad) {
            wn->ensure_grad();
            wn->grad.leftCols(d).noalias() += d_dep * xn->value.transpose();
            wn->grad.rightCols(d).noalias() += d_head * yn->value.transpose();
          }
          if (xn->requires_grad) {
            xn->ensure_grad();
            xn->grad.noalias() += wn->value.leftCols(d).transpose() * d_dep;
          }
          if (yn->requires_grad) {
            yn->ensure_grad();
            yn->grad.noalias() += wn->value.rightCols(d).transpose() * d_head;
          }
        };
      });
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean binary cross-entropy between sigmoid(logits) and gold over masked
/// cells, evaluated in logit space.
template <class Scalar, class BoolArray>
Var<Scalar> binary_cross_entropy_logits(Tape<Scalar>& tape, const Var<Scalar>& logits,
                                        const BoolArray& gold, const BoolArray& mask) {
  detail::require<Scalar>(logits.rows() == gold.rows() && logits.cols() == gold.cols() &&
                              logits.rows() == mask.rows() && logits.cols() == mask.cols(),
                          "binary_cross_entropy_logits: shape mismatch");
  long count = 0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      if (!mask(i, j)) continue;
      ++count;
      const double z = static_cast<double>(logits.value()(i, j));
      const double y = gold(i, j) ? 1.0 : 0.0;
      total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  if (count == 0) throw TensorError("binary_cross_entropy_logits: empty mask");
  Mat<Scalar> v(1, 1);
  v(0, 0) = static_cast<Scalar>(total / static_cast<double>(count));
  // Copy the mask into scalar space once; the backward pass is then a pure
  // elementwise expression.
  Mat<Scalar> mask_scaled(logits.rows(), logits.cols());
  Mat<Scalar> target(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      mask_scaled(i, j) = mask(i, j) ? Scalar(1.0 / static_cast<double>(count)) : Scalar(0);
      target(i, j) = gold(i, j) ? Scalar(1) : Scalar(0);
    }
  return tape.emit("binary_cross_entropy_logits", std::move(v), logits.requires_grad(),
                   [ln = logits.node(), mask_scaled, target](TensorNode<Scalar>* out) {
                     return [ln, mask_scaled, target, out]() {
                       Mat<Scalar> sig =
                           (Scalar(0.5) * (ln->value.array() * Scalar(0.5)).tanh() + Scalar(0.5))
                               .matrix();
                       ln->accumulate(out->grad(0, 0) *
                                      (sig - target).cwiseProduct(mask_scaled));
                     };
                   });
}

/// Mean over rows of -log softmax(logits_row)[target], max-stabilized.
template <class Scalar>
Var<Scalar> softmax_cross_entropy(Tape<Scalar>& tape, const Var<Scalar>& logits,
                                  const std::vector<int>& targets) {
  const Eigen::Index n_rows = logits.rows(), n_classes = logits.cols();
  detail::require<Scalar>(static_cast<Eigen::Index>(targets.size()) == n_rows,
                          "softmax_cross_entropy: one target per row required");
  detail::require<Scalar>(n_rows > 0, "softmax_cross_entropy: empty input");
  for (int t : targets)
    detail::require<Scalar>(t >= 0 && t < n_classes,
                            "softmax_cross_entropy: target outside class range");
  Mat<Scalar> softmax(n_rows, n_classes);
  double total = 0.0;
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const Scalar row_max = logits.value().row(r).maxCoeff();
    Eigen::Array<Scalar, 1, Eigen::Dynamic> shifted =
        logits.value().row(r).array() - row_max;
    Eigen::Array<Scalar, 1, Eigen::Dynamic> exps = shifted.exp();
    const double denom = exps.template cast<double>().sum();
    softmax.row(r) = (exps / static_cast<Scalar>(denom)).matrix();
    total += std::log(denom) - static_cast<double>(shifted(targets[r]));
  }
  Mat<Scalar> v(1, 1);
  v(0, 0) = static_cast<Scalar>(total / static_cast<double>(n_rows));
  return tape.emit("softmax_cross_entropy", std::move(v), logits.requires_grad(),
                   [ln = logits.node(), softmax, targets](TensorNode<Scalar>* out) {
                     return [ln, softmax, targets, out]() {
                       Mat<Scalar> d = softmax;
                       for (Eigen::Index r = 0; r < d.rows(); ++r)
                         d(r, targets[r]) -= Scalar(1);
                       ln->accumulate(out->grad(0, 0) * d /
                                      static_cast<Scalar>(d.rows()));
                     };
                   });
}

// ---------------------------------------------------------------------------
// Parameter registry helpers
// ---------------------------------------------------------------------------

template <class Scalar>
struct NamedParam {
  std::string name;
  Var<Scalar> var;
};

template <class Scalar>
void zero_grads(std::vector<NamedParam<Scalar>>& params) {
  for (auto& p : params) p.var.zero_grad();
}

template <class Scalar>
double global_grad_norm(const std::vector<NamedParam<Scalar>>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.var.grad().size() == 0) continue;
    sq += p.var.grad().template cast<double>().squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace temprel
