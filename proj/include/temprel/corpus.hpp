#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "temprel/schema.hpp"

namespace temprel {

/// Half-open token span of one event inside one sentence.
struct EventSpan {
  std::string id;
  int sentence = 0;
  int start = 0;
  int end = 0;  // exclusive
};

/// Gold temporal link between two annotated events.
struct TLink {
  std::string src;
  std::string dst;
  LabelId label = kNoneLabel;
};

/// An annotated document: pre-tokenized sentences, event spans, TLINKs.
struct Document {
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<EventSpan> events;
  std::vector<TLink> tlinks;

  const EventSpan* find_event(const std::string& id) const;
};

/// Annotation-free prediction input.
struct RawInput {
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
};

/// Returns all invariant violations; empty means the document is valid.
std::vector<std::string> validate(const Document& doc, const DatasetProfile& profile);

/// Line-delimited corpus I/O. The first line is a header record
/// {"format":"temprel-corpus","version":1}; each following line is one
/// document. load_corpus validates every document and reports the offending
/// line on failure. store(load(x)) is byte-identical for valid corpora.
std::vector<Document> load_corpus(const std::string& path, const DatasetProfile& profile);
std::vector<Document> read_corpus(std::istream& in, const DatasetProfile& profile,
                                  const std::string& origin);
void store_corpus(const std::string& path, const std::vector<Document>& docs,
                  const DatasetProfile& profile);
void write_corpus(std::ostream& out, const std::vector<Document>& docs,
                  const DatasetProfile& profile);

/// Reads prediction input: same format as a corpus but events/tlinks are
/// optional and ignored.
std::vector<RawInput> load_raw(const std::string& path);

inline RawInput as_raw(const Document& doc) { return RawInput{doc.doc_id, doc.sentences}; }

/// Knobs of the synthetic corpus generator. Relations are a pure function of
/// planted surface patterns: every linked sentence pair opens its later
/// sentence with a cue token that encodes the relation label, and event
/// tokens come from a closed verb vocabulary.
struct SyntheticOptions {
  int min_sentences = 2;
  int max_sentences = 4;
  int min_filler_tokens = 4;   // non-event tokens per sentence
  int max_filler_tokens = 7;
  double event_prob = 0.85;    // chance a sentence carries an event
  double link_prob = 0.9;      // chance consecutive events are linked
  double multi_token_event_prob = 0.2;
  double flipped_annotation_prob = 0.3;  // store (dst, src, INV(label)) instead
  /// Target frequency per non-NONE label id (index 0 = label id 1). Empty
  /// selects a profile-specific imbalanced default. Labels are allocated by
  /// largest-deficit quota, so realized frequencies track the mixture to
  /// within one link per label.
  std::vector<double> mixture;
};

std::vector<Document> generate_synthetic(std::uint64_t seed, int n_docs,
                                         const DatasetProfile& profile,
                                         const SyntheticOptions& options = {});

}  // namespace temprel
