#include "temprel/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "temprel/preprocess.hpp"

namespace temprel {

void ModelConfig::validate() const {
  if (embed_dim < 1) throw UsageError("embed_dim must be positive");
  if (lstm_hidden < 1) throw UsageError("lstm_hidden must be positive");
  if (lstm_layers < 1) throw UsageError("lstm_layers must be positive");
  if (mlp_dim < 1) throw UsageError("mlp_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("dropout must lie in [0,1)");
  if (embedding_mode != "trainable-lookup" && embedding_mode != "external-vectors")
    throw UsageError("embedding_mode must be 'trainable-lookup' or 'external-vectors'");
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != "<unk>")
    throw DataError("vocab must reserve id 0 for <unk>");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw DataError("duplicate vocab token '" + tokens_[i] + "'");
  }
}

Vocab Vocab::build(const std::vector<WindowInstance>& windows) {
  // Sorted insertion keeps ids independent of window order.
  std::set<std::string> seen;
  for (const auto& w : windows)
    for (const auto& t : w.tokens) seen.insert(t);
  seen.erase("<unk>");
  std::vector<std::string> tokens;
  tokens.reserve(seen.size() + 1);
  tokens.push_back("<unk>");
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return Vocab(std::move(tokens));
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  EmbeddingTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    if (!std::getline(ss, token, '\t') || token.empty())
      throw DataError(path + ":" + std::to_string(line_no) + ": missing token");
    std::vector<float> values;
    std::string field;
    while (std::getline(ss, field, '\t')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stof(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad float '" + field + "'");
      }
    }
    if (values.empty())
      throw DataError(path + ":" + std::to_string(line_no) + ": no vector components");
    if (table.dim == 0) table.dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != table.dim)
      throw DataError(path + ":" + std::to_string(line_no) + ": inconsistent dimension");
    if (!table.vectors.emplace(token, std::move(values)).second)
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate token '" + token + "'");
  }
  if (table.vectors.empty()) throw DataError(path + ": empty embedding file");
  return table;
}

}  // namespace temprel
