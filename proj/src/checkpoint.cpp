#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "temprel/model.hpp"

namespace temprel {

namespace {

using namespace binio;

constexpr char kMagic[8] = {'T', 'P', 'R', 'E', 'L', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_model(const BiaffineModel<float>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);

  const DatasetProfile& prof = model.profile();
  put_str(out, prof.name());
  put_u32(out, static_cast<std::uint32_t>(prof.label_count()));
  for (const auto& l : prof.labels()) put_str(out, l.name);

  const ModelConfig& cfg = model.config();
  put_i32(out, cfg.embed_dim);
  put_i32(out, cfg.lstm_hidden);
  put_i32(out, cfg.lstm_layers);
  put_i32(out, cfg.mlp_dim);
  put_f64(out, cfg.dropout);
  out.put(cfg.use_biaffine ? 1 : 0);
  out.put(cfg.use_arc_module ? 1 : 0);
  put_str(out, cfg.embedding_mode);

  put_u32(out, static_cast<std::uint32_t>(model.vocab().size()));
  for (const auto& t : model.vocab().tokens()) put_str(out, t);

  put_u32(out, static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    put_str(out, p.name);
    const auto& m = p.var.value();
    put_i32(out, static_cast<std::int32_t>(m.rows()));
    put_i32(out, static_cast<std::int32_t>(m.cols()));
    // Column-major raw dump; the in-memory layout is already column-major.
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed: " + path);
}

BiaffineModel<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError(path + ": not a temprel checkpoint (bad magic)");
  if (get_u32(in, path) != kVersion) throw DataError(path + ": unsupported checkpoint version");

  const std::string profile_name = get_str(in, path);
  const DatasetProfile& prof = profile(profile_name);
  const std::uint32_t label_count = get_u32(in, path);
  if (label_count != static_cast<std::uint32_t>(prof.label_count()))
    throw DataError(path + ": label count mismatch against profile '" + profile_name + "'");
  for (int k = 0; k < static_cast<int>(label_count); ++k) {
    if (get_str(in, path) != prof.name_of(k))
      throw DataError(path + ": label order mismatch at id " + std::to_string(k));
  }

  ModelConfig cfg;
  cfg.embed_dim = get_i32(in, path);
  cfg.lstm_hidden = get_i32(in, path);
  cfg.lstm_layers = get_i32(in, path);
  cfg.mlp_dim = get_i32(in, path);
  cfg.dropout = get_f64(in, path);
  cfg.use_biaffine = in.get() != 0;
  cfg.use_arc_module = in.get() != 0;
  cfg.embedding_mode = get_str(in, path);

  const std::uint32_t vocab_size = get_u32(in, path);
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(get_str(in, path));

  BiaffineModel<float> model(cfg, prof, Vocab(std::move(tokens)), 0);

  const std::uint32_t n_params = get_u32(in, path);
  if (n_params != model.params().size())
    throw DataError(path + ": unexpected parameter count for stored config");
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = get_str(in, path);
    const std::int32_t rows_ = get_i32(in, path);
    const std::int32_t cols_ = get_i32(in, path);
    Var<float> var = model.param(name);  // throws on unknown names
    if (var.rows() != rows_ || var.cols() != cols_)
      throw DataError(path + ": shape mismatch for parameter '" + name + "'");
    auto& m = var.mutable_value();
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(float))))
      throw DataError(path + ": truncated file");
  }
  return model;
}

}  // namespace temprel
