#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "temprel/errors.hpp"
#include "temprel/schema.hpp"
#include "temprel/tensor.hpp"

namespace temprel {

struct WindowInstance;

struct ModelConfig {
  int embed_dim = 100;
  int lstm_hidden = 400;  // per direction
  int lstm_layers = 2;
  int mlp_dim = 300;
  double dropout = 0.33;
  bool use_biaffine = true;
  bool use_arc_module = true;
  std::string embedding_mode = "trainable-lookup";  // or "external-vectors"

  void validate() const;
};

/// Token inventory fixed at training time; id 0 is the unknown token.
class Vocab {
 public:
  Vocab() : tokens_{"<unk>"} { index_.emplace("<unk>", 0); }
  explicit Vocab(std::vector<std::string> tokens);

  static Vocab build(const std::vector<WindowInstance>& windows);

  int id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : it->second;
  }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Fixed word vectors used as non-trainable inputs in external-vectors mode.
struct EmbeddingTable {
  int dim = 0;
  std::unordered_map<std::string, std::vector<float>> vectors;
};

/// Loads token<TAB>v1<TAB>v2... lines; all rows must agree on dimension.
EmbeddingTable load_embeddings(const std::string& path);

/// Plain (non-differentiable) scores for one window, used by the decoder.
template <class Scalar>
struct ScoreSet {
  Mat<Scalar> s_arc;       // n x n; empty when the arc module is ablated
  Mat<Scalar> s_rel_flat;  // (n*n) x label columns
  int n = 0;
  bool has_arc = true;
  bool labels_include_none = false;

  Scalar rel(int i, int j, int k) const { return s_rel_flat(pair_index(i, j, n), k); }
  int column_count() const { return static_cast<int>(s_rel_flat.cols()); }
  LabelId column_label(int k) const { return labels_include_none ? k : k + 1; }
};

/// Two-module scorer: a BiLSTM encoder feeding four token projections, then
/// biaffine maps producing arc (existence) and rel (label) scores per ordered
/// token pair.
template <class Scalar>
class BiaffineModel {
 public:
  BiaffineModel(ModelConfig cfg, DatasetProfile prof, Vocab vocab, std::uint64_t seed)
      : cfg_(std::move(cfg)), profile_(std::move(prof)), vocab_(std::move(vocab)) {
    cfg_.validate();
    init_params(seed);
  }

  const ModelConfig& config() const { return cfg_; }
  const DatasetProfile& profile() const { return profile_; }
  const Vocab& vocab() const { return vocab_; }

  std::vector<NamedParam<Scalar>>& params() { return params_; }
  const std::vector<NamedParam<Scalar>>& params() const { return params_; }

  Var<Scalar> param(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw TensorError("unknown parameter '" + name + "'");
    return params_[it->second].var;
  }

  /// Width of the rel scorer output. With the arc module active, NONE is
  /// decided by arcs and the scorer covers real labels only; ablated, NONE
  /// occupies column 0.
  int rel_label_count() const {
    return cfg_.use_arc_module ? profile_.non_none_count() : profile_.label_count();
  }
  bool labels_include_none() const { return !cfg_.use_arc_module; }

  void set_external_embeddings(EmbeddingTable table) {
    if (table.dim != cfg_.embed_dim)
      throw UsageError("embedding table dimension does not match embed_dim");
    external_ = std::move(table);
    has_external_ = true;
  }

  struct Projections {
    Var<Scalar> arc_dep, arc_head, rel_dep, rel_head;
  };
  struct Forward {
    Var<Scalar> s_arc;  // n x n; undefined when the arc module is ablated
    Var<Scalar> s_rel;  // (n*n) x rel_label_count
  };

  Var<Scalar> encode(Tape<Scalar>& tape, const std::vector<std::string>& tokens, Rng& rng,
                     bool training) const {
    if (tokens.empty()) throw DataError("encode: empty token sequence");
    Var<Scalar> x = input_matrix(tape, tokens);
    x = dropout(tape, x, cfg_.dropout, rng, training);
    Var<Scalar> h = x;
    for (int layer = 0; layer < cfg_.lstm_layers; ++layer) {
      const std::string base = "lstm.l" + std::to_string(layer) + ".";
      Var<Scalar> fwd = run_lstm_dir(tape, h, base + "fwd", false);
      Var<Scalar> bwd = run_lstm_dir(tape, h, base + "bwd", true);
      h = vstack(tape, fwd, bwd);
      if (layer + 1 < cfg_.lstm_layers) h = dropout(tape, h, cfg_.dropout, rng, training);
    }
    return h;
  }

  Projections project(Tape<Scalar>& tape, const Var<Scalar>& h, Rng& rng, bool training) const {
    auto head = [&](const char* name) {
      const std::string base = std::string("mlp.") + name + ".";
      Var<Scalar> out = tanh(tape, add_bias(tape, matmul(tape, param(base + "W"), h),
                                            param(base + "b")));
      return dropout(tape, out, cfg_.dropout, rng, training);
    };
    return Projections{head("arc_dep"), head("arc_head"), head("rel_dep"), head("rel_head")};
  }

  Var<Scalar> score_arc(Tape<Scalar>& tape, const Projections& p) const {
    if (!cfg_.use_arc_module) throw TensorError("score_arc: arc module is ablated");
    const Eigen::Index n = p.arc_dep.cols();
    Var<Scalar> flat = concat_linear(tape, p.arc_dep, p.arc_head, param("arc.W"), param("arc.b"));
    if (cfg_.use_biaffine)
      flat = add(tape, bilinear(tape, p.arc_dep, param("arc.U"), p.arc_head, 1), flat);
    return reshape(tape, flat, n, n);
  }

  Var<Scalar> score_rel(Tape<Scalar>& tape, const Projections& p) const {
    Var<Scalar> flat = concat_linear(tape, p.rel_dep, p.rel_head, param("rel.W"), param("rel.b"));
    if (cfg_.use_biaffine)
      flat = add(tape, bilinear(tape, p.rel_dep, param("rel.U"), p.rel_head, rel_label_count()),
                 flat);
    return flat;
  }

  Forward forward(Tape<Scalar>& tape, const std::vector<std::string>& tokens, Rng& rng,
                  bool training) const {
    Var<Scalar> h = encode(tape, tokens, rng, training);
    Projections p = project(tape, h, rng, training);
    Forward out;
    if (cfg_.use_arc_module) out.s_arc = score_arc(tape, p);
    out.s_rel = score_rel(tape, p);
    return out;
  }

  /// Inference-mode scoring: no gradients, no dropout.
  ScoreSet<Scalar> score(const std::vector<std::string>& tokens) const {
    Tape<Scalar> tape(false);
    Rng rng(0);  // unused: dropout is inactive outside training
    Forward f = forward(tape, tokens, rng, false);
    ScoreSet<Scalar> s;
    s.n = static_cast<int>(tokens.size());
    s.has_arc = cfg_.use_arc_module;
    s.labels_include_none = labels_include_none();
    if (cfg_.use_arc_module) s.s_arc = f.s_arc.value();
    s.s_rel_flat = f.s_rel.value();
    return s;
  }

 private:
  Var<Scalar> input_matrix(Tape<Scalar>& tape, const std::vector<std::string>& tokens) const {
    const Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
    if (cfg_.embedding_mode == "trainable-lookup") {
      std::vector<int> ids(tokens.size());
      for (std::size_t t = 0; t < tokens.size(); ++t) ids[t] = vocab_.id_of(tokens[t]);
      return gather_cols(tape, param("embed.E"), std::move(ids));
    }
    if (!has_external_)
      throw UsageError("external-vectors mode requires an embedding table");
    Mat<Scalar> x = Mat<Scalar>::Zero(cfg_.embed_dim, n);
    for (Eigen::Index t = 0; t < n; ++t) {
      auto it = external_.vectors.find(tokens[t]);
      if (it == external_.vectors.end()) continue;  // unseen tokens stay zero
      for (int r = 0; r < cfg_.embed_dim; ++r) x(r, t) = static_cast<Scalar>(it->second[r]);
    }
    return Var<Scalar>::constant(std::move(x));
  }

  Var<Scalar> run_lstm_dir(Tape<Scalar>& tape, const Var<Scalar>& x, const std::string& base,
                           bool reversed) const {
    const Eigen::Index n = x.cols();
    const Eigen::Index hidden = cfg_.lstm_hidden;
    // One big GEMM for all input projections, then a per-step recurrence.
    Var<Scalar> gates_in = add_bias(tape, matmul(tape, param(base + ".Wx"), x),
                                    param(base + ".b"));
    Var<Scalar> wh = param(base + ".Wh");
    Var<Scalar> h_prev = Var<Scalar>::constant(Mat<Scalar>::Zero(hidden, 1));
    Var<Scalar> c_prev = Var<Scalar>::constant(Mat<Scalar>::Zero(hidden, 1));
    std::vector<Var<Scalar>> hs(n);
    for (Eigen::Index step = 0; step < n; ++step) {
      const Eigen::Index t = reversed ? n - 1 - step : step;
      Var<Scalar> z = add(tape, col(tape, gates_in, t), matmul(tape, wh, h_prev));
      Var<Scalar> gi = sigmoid(tape, rows(tape, z, 0, hidden));
      Var<Scalar> gf = sigmoid(tape, rows(tape, z, hidden, hidden));
      Var<Scalar> gg = tanh(tape, rows(tape, z, 2 * hidden, hidden));
      Var<Scalar> go = sigmoid(tape, rows(tape, z, 3 * hidden, hidden));
      Var<Scalar> c = add(tape, mul(tape, gf, c_prev), mul(tape, gi, gg));
      Var<Scalar> h = mul(tape, go, tanh(tape, c));
      hs[t] = h;
      h_prev = h;
      c_prev = c;
    }
    return hstack(tape, hs);
  }

  void add_param(const std::string& name, Eigen::Index r, Eigen::Index c, std::uint64_t seed,
                 const char* init) {
    Rng rng(derive_seed(seed, "param." + name, 0));
    Mat<Scalar> m(r, c);
    if (std::string(init) == "zero") {
      m.setZero();
    } else if (std::string(init) == "uniform0.1") {
      for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
          m(i, j) = static_cast<Scalar>(uniform01(rng) * 0.2 - 0.1);
    } else {  // xavier: uniform with limit sqrt(6/(fan_in+fan_out))
      const double limit = std::sqrt(6.0 / static_cast<double>(r + c));
      for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
          m(i, j) = static_cast<Scalar>((uniform01(rng) * 2.0 - 1.0) * limit);
    }
    index_.emplace(name, params_.size());
    params_.push_back({name, Var<Scalar>::parameter(std::move(m))});
  }

  void init_params(std::uint64_t seed) {
    const int h = cfg_.lstm_hidden, d = cfg_.mlp_dim;
    if (cfg_.embedding_mode == "trainable-lookup")
      add_param("embed.E", cfg_.embed_dim, vocab_.size(), seed, "uniform0.1");
    int in_dim = cfg_.embed_dim;
    for (int layer = 0; layer < cfg_.lstm_layers; ++layer) {
      for (const char* dir : {"fwd", "bwd"}) {
        const std::string base = "lstm.l" + std::to_string(layer) + "." + dir;
        add_param(base + ".Wx", 4 * h, in_dim, seed, "xavier");
        add_param(base + ".Wh", 4 * h, h, seed, "xavier");
        add_param(base + ".b", 4 * h, 1, seed, "zero");
      }
      in_dim = 2 * h;
    }
    for (const char* head : {"arc_dep", "arc_head", "rel_dep", "rel_head"}) {
      const std::string base = std::string("mlp.") + head;
      add_param(base + ".W", d, 2 * h, seed, "xavier");
      add_param(base + ".b", d, 1, seed, "zero");
    }
    if (cfg_.use_arc_module) {
      if (cfg_.use_biaffine) add_param("arc.U", d, d, seed, "xavier");
      add_param("arc.W", 1, 2 * d, seed, "xavier");
      add_param("arc.b", 1, 1, seed, "zero");
    }
    const int labels = rel_label_count();
    if (cfg_.use_biaffine) add_param("rel.U", d, d * labels, seed, "xavier");
    add_param("rel.W", labels, 2 * d, seed, "xavier");
    add_param("rel.b", labels, 1, seed, "zero");
  }

  ModelConfig cfg_;
  DatasetProfile profile_;
  Vocab vocab_;
  EmbeddingTable external_;
  bool has_external_ = false;
  std::vector<NamedParam<Scalar>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Serializes config, profile identity, vocab and all parameters. The file is
/// byte-identical for identical inputs.
void save_model(const BiaffineModel<float>& model, const std::string& path);
BiaffineModel<float> load_model(const std::string& path);

}  // namespace temprel
