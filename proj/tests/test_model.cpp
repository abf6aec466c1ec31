#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "temprel/model.hpp"
#include "temprel/preprocess.hpp"

using namespace temprel;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.embed_dim = 6;
  cfg.lstm_hidden = 5;
  cfg.lstm_layers = 2;
  cfg.mlp_dim = 4;
  return cfg;
}

Vocab small_vocab() {
  return Vocab({"<unk>", "alpha", "beta", "gamma", "delta"});
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "temprel-model-tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.embed_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = tiny_config();
  cfg.lstm_layers = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = tiny_config();
  cfg.mlp_dim = -1;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = tiny_config();
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = tiny_config();
  cfg.embedding_mode = "frozen";
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("vocab basics") {
  Vocab v = small_vocab();
  CHECK(v.size() == 5);
  CHECK(v.id_of("alpha") == 1);
  CHECK(v.id_of("never-seen") == 0);

  CHECK_THROWS_AS(Vocab({"alpha", "<unk>"}), DataError);
  CHECK_THROWS_AS(Vocab({"<unk>", "alpha", "alpha"}), DataError);

  WindowInstance w1, w2;
  w1.tokens = {"b", "a"};
  w2.tokens = {"c", "a"};
  Vocab built = Vocab::build({w1, w2});
  CHECK(built.size() == 4);  // <unk> + {a, b, c}
  CHECK(built.tokens()[0] == "<unk>");
  CHECK(built.id_of("a") < built.id_of("b"));
  CHECK(built.id_of("b") < built.id_of("c"));
}

TEST_CASE("encoder output geometry matches the default configuration") {
  ModelConfig cfg;  // defaults: hidden 400 per direction, two layers
  BiaffineModel<float> model(cfg, profile("tbdense"), small_vocab(), 1);

  Tape<float> tape(false);
  Rng rng(0);
  auto h1 = model.encode(tape, {"alpha"}, rng, false);
  CHECK(h1.rows() == 800);
  CHECK(h1.cols() == 1);

  auto p = model.project(tape, h1, rng, false);
  CHECK(p.arc_dep.rows() == 300);
  CHECK(p.arc_head.rows() == 300);
  CHECK(p.rel_dep.rows() == 300);
  CHECK(p.rel_head.rows() == 300);

  auto s = model.score({"alpha", "beta", "gamma"});
  CHECK(s.n == 3);
  CHECK(s.s_arc.rows() == 3);
  CHECK(s.s_arc.cols() == 3);
  CHECK(s.s_rel_flat.rows() == 9);
  CHECK(s.s_rel_flat.cols() == 6);  // six real labels scored when arcs decide NONE
  CHECK(s.column_label(0) == profile("tbdense").id_of("BEFORE"));
}

TEST_CASE("scoring is deterministic in eval mode and order sensitive") {
  BiaffineModel<float> model(tiny_config(), profile("tbdense"), small_vocab(), 7);
  const std::vector<std::string> tokens{"alpha", "beta", "gamma"};
  auto a = model.score(tokens);
  auto b = model.score(tokens);
  CHECK((a.s_arc - b.s_arc).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((a.s_rel_flat - b.s_rel_flat).cwiseAbs().maxCoeff() == 0.0f);

  auto rev = model.score({"gamma", "beta", "alpha"});
  CHECK((a.s_rel_flat - rev.s_rel_flat).cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("distinct projection heads and bias-only behavior") {
  BiaffineModel<float> model(tiny_config(), profile("tbdense"), small_vocab(), 3);
  Tape<float> tape(false);
  Rng rng(0);
  auto h = model.encode(tape, {"alpha", "beta", "gamma"}, rng, false);
  auto p = model.project(tape, h, rng, false);
  CHECK((p.arc_dep.value() - p.arc_head.value()).cwiseAbs().maxCoeff() > 0.0f);
  CHECK((p.rel_dep.value() - p.arc_dep.value()).cwiseAbs().maxCoeff() > 0.0f);

  // Zeroed projection weights leave tanh(bias), identical for every token.
  model.param("mlp.arc_dep.W").mutable_value().setZero();
  auto& bias = model.param("mlp.arc_dep.b").mutable_value();
  for (Eigen::Index i = 0; i < bias.rows(); ++i) bias(i, 0) = 0.1f * static_cast<float>(i + 1);
  auto p2 = model.project(tape, h, rng, false);
  for (Eigen::Index t = 0; t < 3; ++t)
    for (Eigen::Index i = 0; i < bias.rows(); ++i)
      CHECK(p2.arc_dep.value()(i, t) == doctest::Approx(std::tanh(bias(i, 0))));
}

TEST_CASE("all-zero parameters give zero scores everywhere") {
  BiaffineModel<float> model(tiny_config(), profile("tbdense"), small_vocab(), 3);
  for (auto& p : model.params()) p.var.mutable_value().setZero();
  auto s = model.score({"alpha", "beta"});
  CHECK(s.s_arc.cwiseAbs().maxCoeff() == 0.0f);
  CHECK(s.s_rel_flat.cwiseAbs().maxCoeff() == 0.0f);  // softmax over labels is uniform
}

TEST_CASE("hand-set arc scorer matches the closed form") {
  ModelConfig cfg = tiny_config();
  cfg.mlp_dim = 1;
  BiaffineModel<double> model(cfg, profile("tbdense"), small_vocab(), 1);
  model.param("arc.U").mutable_value()(0, 0) = 2.0;
  auto& w = model.param("arc.W").mutable_value();
  w(0, 0) = 3.0;
  w(0, 1) = 4.0;
  model.param("arc.b").mutable_value()(0, 0) = 0.5;

  Mat<double> dep(1, 2), head(1, 2);
  dep << 1, 2;
  head << 5, 7;
  BiaffineModel<double>::Projections p{Var<double>::constant(dep), Var<double>::constant(head),
                                       Var<double>::constant(dep), Var<double>::constant(head)};
  Tape<double> tape(false);
  auto s = model.score_arc(tape, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double expected = dep(0, i) * 2.0 * head(0, j) + 3.0 * dep(0, i) + 4.0 * head(0, j) + 0.5;
      CHECK(s.value()(i, j) == doctest::Approx(expected));
    }
}

TEST_CASE("hand-set rel scorer matches the closed form for two labels") {
  DatasetProfile two("two-label", {"BEFORE", "AFTER"}, {{"BEFORE", "AFTER"}}, {"BEFORE"});
  ModelConfig cfg = tiny_config();
  cfg.mlp_dim = 1;
  BiaffineModel<double> model(cfg, two, small_vocab(), 1);
  REQUIRE(model.rel_label_count() == 2);

  auto& u = model.param("rel.U").mutable_value();  // 1 x 2: one 1x1 block per label
  u(0, 0) = 2.0;
  u(0, 1) = -1.0;
  auto& w = model.param("rel.W").mutable_value();  // 2 x 2
  w << 1.0, 0.5, -0.5, 2.0;
  auto& b = model.param("rel.b").mutable_value();
  b << 0.25, -0.75;

  Mat<double> dep(1, 2), head(1, 2);
  dep << 1, 2;
  head << 5, 7;
  BiaffineModel<double>::Projections p{Var<double>::constant(dep), Var<double>::constant(head),
                                       Var<double>::constant(dep), Var<double>::constant(head)};
  Tape<double> tape(false);
  auto s = model.score_rel(tape, p);
  REQUIRE(s.rows() == 4);
  REQUIRE(s.cols() == 2);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        const double expected = dep(0, i) * u(0, k) * head(0, j) + w(k, 0) * dep(0, i) +
                                w(k, 1) * head(0, j) + b(k, 0);
        CHECK(s.value()(pair_index(i, j, 2), k) == doctest::Approx(expected));
      }
}

TEST_CASE("ablation flags change the computation") {
  const std::vector<std::string> tokens{"alpha", "beta"};

  ModelConfig with = tiny_config();
  ModelConfig without = tiny_config();
  without.use_biaffine = false;
  BiaffineModel<float> m1(with, profile("tbdense"), small_vocab(), 11);
  BiaffineModel<float> m2(without, profile("tbdense"), small_vocab(), 11);
  CHECK((m1.score(tokens).s_rel_flat - m2.score(tokens).s_rel_flat).cwiseAbs().maxCoeff() > 0.0f);
  CHECK_THROWS_AS(m2.param("rel.U"), TensorError);

  ModelConfig no_arc = tiny_config();
  no_arc.use_arc_module = false;
  BiaffineModel<float> m3(no_arc, profile("tbdense"), small_vocab(), 11);
  auto s3 = m3.score(tokens);
  CHECK_FALSE(s3.has_arc);
  CHECK(s3.labels_include_none);
  CHECK(s3.s_rel_flat.cols() == 7);  // NONE occupies column 0
  CHECK(s3.column_label(0) == kNoneLabel);
  CHECK(s3.column_label(1) == profile("tbdense").id_of("BEFORE"));
  Tape<float> tape(false);
  Rng rng(0);
  auto h = m3.encode(tape, tokens, rng, false);
  auto p = m3.project(tape, h, rng, false);
  CHECK_THROWS_AS(m3.score_arc(tape, p), TensorError);
}

TEST_CASE("unknown parameter lookups fail loudly") {
  BiaffineModel<float> model(tiny_config(), profile("tbdense"), small_vocab(), 1);
  CHECK_THROWS_WITH_AS(model.param("mlp.arc_dep.M"), doctest::Contains("unknown parameter"),
                       TensorError);
}

TEST_CASE("external embeddings feed the encoder") {
  ModelConfig cfg = tiny_config();
  cfg.embedding_mode = "external-vectors";
  cfg.embed_dim = 2;
  BiaffineModel<float> model(cfg, profile("tbdense"), small_vocab(), 5);

  EmbeddingTable wrong;
  wrong.dim = 3;
  CHECK_THROWS_AS(model.set_external_embeddings(wrong), UsageError);

  Tape<float> tape(false);
  Rng rng(0);
  CHECK_THROWS_AS(model.encode(tape, {"alpha"}, rng, false), UsageError);  // no table yet

  EmbeddingTable table;
  table.dim = 2;
  table.vectors["known"] = {0.5f, -0.5f};
  model.set_external_embeddings(table);

  auto seen = model.score({"known"});
  auto unseen1 = model.score({"mystery-a"});
  auto unseen2 = model.score({"mystery-b"});
  CHECK((unseen1.s_rel_flat - unseen2.s_rel_flat).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((seen.s_rel_flat - unseen1.s_rel_flat).cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("embedding files parse with per-line validation") {
  auto dir = temp_dir();
  const auto good = dir / "vectors.tsv";
  {
    std::ofstream out(good);
    out << "hello\t0.5\t-1.0\n";
    out << "world\t1.25\t2.5\n";
  }
  EmbeddingTable t = load_embeddings(good.string());
  CHECK(t.dim == 2);
  REQUIRE(t.vectors.count("hello") == 1);
  CHECK(t.vectors.at("hello")[1] == doctest::Approx(-1.0f));

  const auto ragged = dir / "ragged.tsv";
  {
    std::ofstream out(ragged);
    out << "hello\t0.5\t-1.0\n";
    out << "world\t1.25\n";
  }
  CHECK_THROWS_WITH_AS(load_embeddings(ragged.string()), doctest::Contains(":2:"), DataError);

  const auto dup = dir / "dup.tsv";
  {
    std::ofstream out(dup);
    out << "hello\t0.5\n";
    out << "hello\t0.75\n";
  }
  CHECK_THROWS_AS(load_embeddings(dup.string()), DataError);

  CHECK_THROWS_AS(load_embeddings((dir / "absent.tsv").string()), DataError);
}

TEST_CASE("checkpoints round trip exactly") {
  auto dir = temp_dir();
  ModelConfig cfg = tiny_config();
  cfg.use_biaffine = true;
  BiaffineModel<float> model(cfg, profile("matres"), small_vocab(), 42);

  const auto p1 = dir / "model1.bin";
  const auto p2 = dir / "model2.bin";
  save_model(model, p1.string());
  BiaffineModel<float> loaded = load_model(p1.string());
  save_model(loaded, p2.string());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(p1) == slurp(p2));

  CHECK(loaded.config().lstm_hidden == cfg.lstm_hidden);
  CHECK(loaded.config().use_arc_module == cfg.use_arc_module);
  CHECK(loaded.profile().name() == "matres");
  CHECK(loaded.vocab().size() == model.vocab().size());

  const std::vector<std::string> tokens{"alpha", "beta", "gamma"};
  auto a = model.score(tokens);
  auto b = loaded.score(tokens);
  CHECK((a.s_arc - b.s_arc).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((a.s_rel_flat - b.s_rel_flat).cwiseAbs().maxCoeff() == 0.0f);

  CHECK_THROWS_AS(load_model((dir / "absent.bin").string()), DataError);

  const auto garbage = dir / "garbage.bin";
  {
    std::ofstream out(garbage, std::ios::binary);
    out << "NOTAMODEL";
  }
  CHECK_THROWS_AS(load_model(garbage.string()), DataError);
}

TEST_CASE("ablated checkpoints restore their flags") {
  auto dir = temp_dir();
  ModelConfig cfg = tiny_config();
  cfg.use_arc_module = false;
  cfg.use_biaffine = false;
  BiaffineModel<float> model(cfg, profile("tbdense"), small_vocab(), 9);
  const auto path = dir / "ablated.bin";
  save_model(model, path.string());
  BiaffineModel<float> loaded = load_model(path.string());
  CHECK_FALSE(loaded.config().use_arc_module);
  CHECK_FALSE(loaded.config().use_biaffine);
  auto s = loaded.score({"alpha"});
  CHECK_FALSE(s.has_arc);
  CHECK(s.s_rel_flat.cols() == 7);
}
