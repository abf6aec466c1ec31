#include "temprel/config.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"

namespace temprel {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw UsageError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void take(const json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!root.is_object()) throw UsageError("config " + path + ": top level must be an object");

  RunConfig cfg;
  check_keys(root,
             {"profile", "seed", "model", "optimizer", "train", "preprocess", "synth", "bench"},
             "top level");
  take(root, "profile", cfg.profile_name);
  take(root, "seed", cfg.seed);

  if (root.contains("model")) {
    const json& m = root.at("model");
    check_keys(m,
               {"embed_dim", "lstm_hidden", "lstm_layers", "mlp_dim", "dropout", "use_biaffine",
                "use_arc_module", "embedding_mode"},
               "model");
    take(m, "embed_dim", cfg.model.embed_dim);
    take(m, "lstm_hidden", cfg.model.lstm_hidden);
    take(m, "lstm_layers", cfg.model.lstm_layers);
    take(m, "mlp_dim", cfg.model.mlp_dim);
    take(m, "dropout", cfg.model.dropout);
    take(m, "use_biaffine", cfg.model.use_biaffine);
    take(m, "use_arc_module", cfg.model.use_arc_module);
    take(m, "embedding_mode", cfg.model.embedding_mode);
  }
  if (root.contains("optimizer")) {
    const json& o = root.at("optimizer");
    check_keys(o, {"lr", "mu", "nu", "epsilon", "clip_norm", "decay", "decay_interval"},
               "optimizer");
    take(o, "lr", cfg.adam.lr);
    take(o, "mu", cfg.adam.mu);
    take(o, "nu", cfg.adam.nu);
    take(o, "epsilon", cfg.adam.epsilon);
    take(o, "clip_norm", cfg.adam.clip_norm);
    take(o, "decay", cfg.adam.decay);
    take(o, "decay_interval", cfg.adam.decay_interval);
  }
  if (root.contains("train")) {
    const json& t = root.at("train");
    check_keys(t, {"epochs", "dev_fraction", "embeddings", "loss_curve"}, "train");
    take(t, "epochs", cfg.epochs);
    take(t, "dev_fraction", cfg.dev_fraction);
    take(t, "embeddings", cfg.embeddings_path);
    take(t, "loss_curve", cfg.loss_curve_path);
  }
  if (root.contains("preprocess")) {
    const json& p = root.at("preprocess");
    check_keys(p, {"seed", "max_window_len", "negative_sample_rate"}, "preprocess");
    take(p, "seed", cfg.preprocess.seed);
    take(p, "max_window_len", cfg.preprocess.max_window_len);
    take(p, "negative_sample_rate", cfg.preprocess.negative_sample_rate);
  }
  if (root.contains("synth")) {
    const json& s = root.at("synth");
    check_keys(s,
               {"docs", "min_sentences", "max_sentences", "min_filler_tokens",
                "max_filler_tokens", "event_prob", "link_prob", "multi_token_event_prob",
                "flipped_annotation_prob", "mixture"},
               "synth");
    take(s, "docs", cfg.synth_docs);
    take(s, "min_sentences", cfg.synth.min_sentences);
    take(s, "max_sentences", cfg.synth.max_sentences);
    take(s, "min_filler_tokens", cfg.synth.min_filler_tokens);
    take(s, "max_filler_tokens", cfg.synth.max_filler_tokens);
    take(s, "event_prob", cfg.synth.event_prob);
    take(s, "link_prob", cfg.synth.link_prob);
    take(s, "multi_token_event_prob", cfg.synth.multi_token_event_prob);
    take(s, "flipped_annotation_prob", cfg.synth.flipped_annotation_prob);
    take(s, "mixture", cfg.synth.mixture);
  }
  if (root.contains("bench")) {
    const json& b = root.at("bench");
    check_keys(b, {"repetitions", "workers"}, "bench");
    take(b, "repetitions", cfg.bench_repetitions);
    take(b, "workers", cfg.workers);
  }
  return cfg;
}

std::string default_config_path() {
  const char* env = std::getenv("TEMPREL_CONFIG");
  return env == nullptr ? std::string() : std::string(env);
}

}  // namespace temprel
