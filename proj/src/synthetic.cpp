#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/rng.hpp"

namespace temprel {

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the",  "a",     "on",      "in",     "officials", "market", "city",
      "plan", "deal",  "report",  "monday", "group",     "talks",  "new",
      "old",  "local", "foreign", "press",  "agency",    "again",  "quietly",
      "board", "policy", "budget", "region"};
  return words;
}

const std::vector<std::string>& event_verbs() {
  static const std::vector<std::string> verbs{
      "said",     "met",    "began",  "ended",    "arrived", "left",
      "announced", "signed", "visited", "reported", "opened",  "closed"};
  return verbs;
}

const std::vector<std::string>& event_particles() {
  static const std::vector<std::string> parts{"up", "down", "off", "over"};
  return parts;
}

// Surface cue tokens planted at the start of the later sentence of a linked
// pair. The cue alone determines the label of (earlier event, later event).
std::vector<std::string> cues_for(const std::string& label_name) {
  static const std::map<std::string, std::vector<std::string>> builtin{
      {"BEFORE", {"beforehand", "previously", "formerly"}},
      {"AFTER", {"afterwards", "subsequently", "thereafter"}},
      {"SIMULTANEOUS", {"meanwhile", "simultaneously"}},
      {"VAGUE", {"perhaps", "possibly", "maybe"}},
      {"INCLUDES", {"throughout", "alongside"}},
      {"IS_INCLUDED", {"within", "amid"}}};
  auto it = builtin.find(label_name);
  if (it != builtin.end()) return it->second;
  return {"cue." + label_name + ".0", "cue." + label_name + ".1"};
}

std::vector<double> default_mixture(const DatasetProfile& profile) {
  // VAGUE-heavy imbalance resembling dense temporal annotation; uniform
  // fallback for custom profiles.
  if (profile.name() == "tbdense") return {0.269, 0.192, 0.015, 0.447, 0.039, 0.038};
  if (profile.name() == "matres") return {0.504, 0.322, 0.037, 0.137};
  return std::vector<double>(profile.non_none_count(), 1.0 / profile.non_none_count());
}

// Largest-deficit quota allocation keeps the realized label histogram within
// one link of the requested mixture at every prefix.
class LabelQuota {
 public:
  explicit LabelQuota(std::vector<double> weights) : weights_(std::move(weights)) {
    counts_.assign(weights_.size(), 0);
    double total = 0;
    for (double w : weights_) total += w;
    if (total <= 0) throw UsageError("synthetic mixture weights must sum to a positive value");
    for (double& w : weights_) w /= total;
  }

  LabelId next() {
    ++total_;
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double deficit = weights_[i] * total_ - counts_[i];
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = i;
      }
    }
    ++counts_[best];
    return static_cast<LabelId>(best + 1);  // label ids start after NONE
  }

 private:
  std::vector<double> weights_;
  std::vector<long> counts_;
  long total_ = 0;
};

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[uniform_int(rng, 0, static_cast<int>(pool.size()) - 1)];
}

}  // namespace

std::vector<Document> generate_synthetic(std::uint64_t seed, int n_docs,
                                         const DatasetProfile& profile,
                                         const SyntheticOptions& options) {
  if (n_docs < 1) throw UsageError("generate_synthetic: n_docs must be >= 1");
  std::vector<double> mixture =
      options.mixture.empty() ? default_mixture(profile) : options.mixture;
  if (static_cast<int>(mixture.size()) != profile.non_none_count())
    throw UsageError("synthetic mixture must have one weight per non-NONE label");

  LabelQuota quota(mixture);
  std::vector<Document> docs;
  docs.reserve(n_docs);

  for (int d = 0; d < n_docs; ++d) {
    Rng rng(derive_seed(seed, "synth-doc", static_cast<std::uint64_t>(d)));
    Document doc;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "synth-%04d", d);
      doc.doc_id = buf;
    }

    const int n_sentences = uniform_int(rng, options.min_sentences, options.max_sentences);
    // Decide event placement first; links exist between events of
    // consecutive sentences.
    std::vector<bool> has_event(n_sentences);
    for (int s = 0; s < n_sentences; ++s) has_event[s] = bernoulli(rng, options.event_prob);
    // A document must contain at least one event to be interesting.
    if (std::none_of(has_event.begin(), has_event.end(), [](bool b) { return b; }))
      has_event[uniform_int(rng, 0, n_sentences - 1)] = true;

    std::vector<LabelId> incoming_label(n_sentences, kNoneLabel);  // cue planted in sentence s
    std::vector<int> event_index(n_sentences, -1);
    int next_event = 0;
    for (int s = 0; s < n_sentences; ++s)
      if (has_event[s]) event_index[s] = next_event++;

    for (int s = 0; s + 1 < n_sentences; ++s) {
      if (!has_event[s] || !has_event[s + 1]) continue;
      if (!bernoulli(rng, options.link_prob)) continue;
      const LabelId label = quota.next();
      incoming_label[s + 1] = label;
      const std::string src = "e" + std::to_string(event_index[s]);
      const std::string dst = "e" + std::to_string(event_index[s + 1]);
      // Gold may be annotated in either direction; preprocessing canonicalizes.
      if (bernoulli(rng, options.flipped_annotation_prob))
        doc.tlinks.push_back({dst, src, profile.inverse(label)});
      else
        doc.tlinks.push_back({src, dst, label});
    }

    for (int s = 0; s < n_sentences; ++s) {
      std::vector<std::string> tokens;
      if (incoming_label[s] != kNoneLabel)
        tokens.push_back(pick(cues_for(profile.name_of(incoming_label[s])), rng));
      const int fillers = uniform_int(rng, options.min_filler_tokens, options.max_filler_tokens);
      for (int t = 0; t < fillers; ++t) tokens.push_back(pick(filler_words(), rng));

      if (has_event[s]) {
        // Insert the event after the cue, somewhere among the fillers.
        const int lo = incoming_label[s] != kNoneLabel ? 1 : 0;
        const int pos = uniform_int(rng, lo, static_cast<int>(tokens.size()));
        std::vector<std::string> event_tokens{pick(event_verbs(), rng)};
        if (bernoulli(rng, options.multi_token_event_prob))
          event_tokens.push_back(pick(event_particles(), rng));
        tokens.insert(tokens.begin() + pos, event_tokens.begin(), event_tokens.end());
        doc.events.push_back({"e" + std::to_string(event_index[s]), s, pos,
                              pos + static_cast<int>(event_tokens.size())});
      }
      doc.sentences.push_back(std::move(tokens));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace temprel
