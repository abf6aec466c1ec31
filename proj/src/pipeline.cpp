#include "temprel/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "temprel/decode.hpp"

namespace temprel {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormat = "temprel-predictions";
constexpr int kVersion = 1;

DocPrediction predict_one(const BiaffineModel<float>& model,
                          const std::vector<WindowInstance>& windows, const std::string& doc_id,
                          long skipped) {
  DocPrediction out;
  out.doc_id = doc_id;
  out.skipped_windows = skipped;
  std::map<std::tuple<int, int, int, int>, LabelId> edges;
  for (const auto& w : windows) {
    TemporalGraph g = decode(model.score(w.tokens));
    for (const auto& [pair, label] : g.pairs) {
      const auto& [src_s, src_t] = w.token_origin[pair.first];
      const auto& [dst_s, dst_t] = w.token_origin[pair.second];
      edges.emplace(std::make_tuple(src_s, src_t, dst_s, dst_t), label);
    }
    for (const auto& [key, label] : event_level(g, w.event_first_tokens))
      out.event_pairs.emplace(key, label);
  }
  out.edges.reserve(edges.size());
  for (const auto& [key, label] : edges)
    out.edges.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                         label});
  return out;
}

template <class MakeWindows>
std::vector<DocPrediction> run_parallel(std::size_t count, int workers,
                                        const MakeWindows& predict_at) {
  std::vector<DocPrediction> results(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = predict_at(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mu;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          results[i] = predict_at(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace

std::vector<DocPrediction> predict_docs(const BiaffineModel<float>& model,
                                        const std::vector<Document>& docs,
                                        const PredictionOptions& options) {
  return run_parallel(docs.size(), options.workers, [&](std::size_t i) {
    PreprocessStats stats;
    auto windows = make_windows(docs[i], model.profile(), options.preprocess, &stats);
    return predict_one(model, windows, docs[i].doc_id, stats.skipped_windows);
  });
}

std::vector<DocPrediction> predict_raw(const BiaffineModel<float>& model,
                                       const std::vector<RawInput>& raws,
                                       const PredictionOptions& options) {
  return run_parallel(raws.size(), options.workers, [&](std::size_t i) {
    PreprocessStats stats;
    auto windows = make_raw_windows(raws[i], options.preprocess, &stats);
    return predict_one(model, windows, raws[i].doc_id, stats.skipped_windows);
  });
}

void write_predictions(const std::string& path, const std::vector<DocPrediction>& preds,
                       const DatasetProfile& profile) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write predictions: " + path);
  ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["profile"] = profile.name();
  out << header.dump() << '\n';
  for (const auto& p : preds) {
    ordered_json j;
    j["doc_id"] = p.doc_id;
    j["edges"] = ordered_json::array();
    for (const auto& e : p.edges) {
      ordered_json edge;
      edge["src"] = {e.src_sentence, e.src_token};
      edge["dst"] = {e.dst_sentence, e.dst_token};
      edge["label"] = profile.name_of(e.label);
      j["edges"].push_back(std::move(edge));
    }
    j["event_pairs"] = ordered_json::array();
    for (const auto& [key, label] : p.event_pairs)
      j["event_pairs"].push_back({key.first, key.second, profile.name_of(label)});
    j["skipped_windows"] = p.skipped_windows;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<DocPrediction> read_predictions(const std::string& path,
                                            const DatasetProfile& profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open predictions: " + path);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) throw DataError(path + ": empty prediction file");
  ++line_no;
  try {
    ordered_json header = ordered_json::parse(line);
    if (header.at("format") != kFormat || header.at("version") != kVersion)
      fail("not a temprel prediction file");
    if (header.at("profile") != profile.name())
      fail("prediction file was produced with profile '" +
           header.at("profile").get<std::string>() + "'");
  } catch (const ordered_json::exception& e) {
    fail(std::string("bad header: ") + e.what());
  }
  std::vector<DocPrediction> preds;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ordered_json j = ordered_json::parse(line);
      DocPrediction p;
      p.doc_id = j.at("doc_id").get<std::string>();
      for (const auto& edge : j.at("edges")) {
        PredictedEdge e;
        e.src_sentence = edge.at("src").at(0).get<int>();
        e.src_token = edge.at("src").at(1).get<int>();
        e.dst_sentence = edge.at("dst").at(0).get<int>();
        e.dst_token = edge.at("dst").at(1).get<int>();
        e.label = profile.id_of(edge.at("label").get<std::string>());
        p.edges.push_back(e);
      }
      for (const auto& ep : j.at("event_pairs"))
        p.event_pairs.emplace(
            std::make_pair(ep.at(0).get<std::string>(), ep.at(1).get<std::string>()),
            profile.id_of(ep.at(2).get<std::string>()));
      p.skipped_windows = j.at("skipped_windows").get<long>();
      preds.push_back(std::move(p));
    } catch (const ordered_json::exception& e) {
      fail(std::string("bad prediction record: ") + e.what());
    } catch (const DataError&) {
      throw;
    }
  }
  return preds;
}

PairLabelMap corpus_event_pairs(const std::vector<Document>& docs) {
  PairLabelMap out;
  for (const auto& doc : docs)
    for (const auto& link : doc.tlinks)
      out.emplace(std::make_pair(doc.doc_id + "#" + link.src, doc.doc_id + "#" + link.dst),
                  link.label);
  return out;
}

PairLabelMap prediction_event_pairs(const std::vector<DocPrediction>& preds) {
  PairLabelMap out;
  for (const auto& p : preds)
    for (const auto& [key, label] : p.event_pairs)
      out.emplace(std::make_pair(p.doc_id + "#" + key.first, p.doc_id + "#" + key.second), label);
  return out;
}

}  // namespace temprel
