#include "temprel/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace temprel {

using ordered_json = nlohmann::ordered_json;

const EventSpan* Document::find_event(const std::string& id) const {
  for (const auto& e : events)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<std::string> validate(const Document& doc, const DatasetProfile& profile) {
  std::vector<std::string> violations;
  auto complain = [&](const std::string& what) {
    violations.push_back("doc " + doc.doc_id + ": " + what);
  };

  if (doc.doc_id.empty()) complain("empty doc_id");
  if (doc.sentences.empty()) complain("no sentences");
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    if (doc.sentences[s].empty())
      complain("sentence " + std::to_string(s) + " is empty");
    for (std::size_t t = 0; t < doc.sentences[s].size(); ++t)
      if (doc.sentences[s][t].empty())
        complain("sentence " + std::to_string(s) + " token " + std::to_string(t) + " is empty");
  }

  std::set<std::string> event_ids;
  for (const auto& e : doc.events) {
    if (!event_ids.insert(e.id).second) complain("duplicate event id " + e.id);
    if (e.sentence < 0 || e.sentence >= static_cast<int>(doc.sentences.size())) {
      complain("event " + e.id + " references sentence " + std::to_string(e.sentence));
      continue;
    }
    const int len = static_cast<int>(doc.sentences[e.sentence].size());
    if (e.start >= e.end)
      complain("event " + e.id + " has empty span [" + std::to_string(e.start) + "," +
               std::to_string(e.end) + ")");
    if (e.start < 0 || e.end > len)
      complain("event " + e.id + " span exceeds sentence range [0," + std::to_string(len) + ")");
  }

  std::set<std::pair<std::string, std::string>> seen_pairs;
  for (const auto& t : doc.tlinks) {
    if (!event_ids.count(t.src)) complain("tlink references undefined event id " + t.src);
    if (!event_ids.count(t.dst)) complain("tlink references undefined event id " + t.dst);
    if (t.src == t.dst) complain("tlink is a self-link on event " + t.src);
    if (t.label <= kNoneLabel || t.label >= profile.label_count())
      complain("tlink (" + t.src + "," + t.dst + ") carries invalid label id " +
               std::to_string(t.label));
    if (!seen_pairs.insert({t.src, t.dst}).second)
      complain("duplicate tlink annotation for ordered pair (" + t.src + "," + t.dst + ")");
  }
  return violations;
}

namespace {

constexpr const char* kCorpusFormat = "temprel-corpus";
constexpr int kCorpusVersion = 1;

Document parse_document(const ordered_json& j, const DatasetProfile& profile,
                        const std::string& where) {
  static const std::set<std::string> known{"doc_id", "sentences", "events", "tlinks"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw DataError(where + ": unknown field '" + key + "'");

  Document doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    for (const auto& sent : j.at("sentences"))
      doc.sentences.push_back(sent.get<std::vector<std::string>>());
    if (j.contains("events")) {
      for (const auto& e : j.at("events"))
        doc.events.push_back({e.at("id").get<std::string>(), e.at("sentence").get<int>(),
                              e.at("start").get<int>(), e.at("end").get<int>()});
    }
    if (j.contains("tlinks")) {
      for (const auto& t : j.at("tlinks"))
        doc.tlinks.push_back({t.at("src").get<std::string>(), t.at("dst").get<std::string>(),
                              profile.id_of(t.at("label").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
  return doc;
}

ordered_json document_to_json(const Document& doc, const DatasetProfile& profile) {
  ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["sentences"] = doc.sentences;
  j["events"] = ordered_json::array();
  for (const auto& e : doc.events) {
    ordered_json je;
    je["id"] = e.id;
    je["sentence"] = e.sentence;
    je["start"] = e.start;
    je["end"] = e.end;
    j["events"].push_back(je);
  }
  j["tlinks"] = ordered_json::array();
  for (const auto& t : doc.tlinks) {
    ordered_json jt;
    jt["src"] = t.src;
    jt["dst"] = t.dst;
    jt["label"] = profile.name_of(t.label);
    j["tlinks"].push_back(jt);
  }
  return j;
}

void check_header(const std::string& line, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ":1: malformed header: " + e.what());
  }
  if (!j.contains("format") || j["format"] != kCorpusFormat)
    throw DataError(origin + ":1: missing or wrong format marker (expected " +
                    std::string(kCorpusFormat) + ")");
  if (!j.contains("version") || j["version"].get<int>() != kCorpusVersion)
    throw DataError(origin + ":1: unsupported corpus version");
}

}  // namespace

std::vector<Document> read_corpus(std::istream& in, const DatasetProfile& profile,
                                  const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty corpus file");
  check_header(line, origin);

  std::vector<Document> docs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    Document doc = parse_document(j, profile, where);
    auto violations = validate(doc, profile);
    if (!violations.empty()) throw DataError(where + ": " + violations.front());
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::string& path, const DatasetProfile& profile) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return read_corpus(in, profile, path);
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs,
                  const DatasetProfile& profile) {
  ordered_json header;
  header["format"] = kCorpusFormat;
  header["version"] = kCorpusVersion;
  out << header.dump() << "\n";
  for (const auto& doc : docs) out << document_to_json(doc, profile).dump() << "\n";
}

void store_corpus(const std::string& path, const std::vector<Document>& docs,
                  const DatasetProfile& profile) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw DataError("cannot write corpus file: " + path);
  write_corpus(out, docs, profile);
}

std::vector<RawInput> load_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty input file");
  check_header(line, path);

  std::vector<RawInput> inputs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      ordered_json j = ordered_json::parse(line);
      RawInput raw;
      raw.doc_id = j.at("doc_id").get<std::string>();
      for (const auto& sent : j.at("sentences"))
        raw.sentences.push_back(sent.get<std::vector<std::string>>());
      if (raw.sentences.empty()) throw DataError(where + ": no sentences");
      for (const auto& s : raw.sentences)
        if (s.empty()) throw DataError(where + ": empty sentence");
      inputs.push_back(std::move(raw));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
  }
  return inputs;
}

}  // namespace temprel
