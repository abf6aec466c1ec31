#include "temprel/schema.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace temprel {

DatasetProfile::DatasetProfile(
    std::string name, std::vector<std::string> label_names,
    std::vector<std::pair<std::string, std::string>> inverse_pairs,
    std::vector<std::string> canonical)
    : name_(std::move(name)) {
  labels_.push_back({kNoneLabel, "NONE"});
  for (const auto& n : label_names) {
    if (n == "NONE") throw DataError("profile '" + name_ + "': NONE is implicit and may not be listed");
    if (has_label(n)) throw DataError("profile '" + name_ + "': duplicate label " + n);
    labels_.push_back({static_cast<LabelId>(labels_.size()), n});
  }

  inverse_.assign(labels_.size(), kNoneLabel);
  for (std::size_t i = 1; i < labels_.size(); ++i) inverse_[i] = static_cast<LabelId>(i);
  for (const auto& [a, b] : inverse_pairs) {
    LabelId ia = id_of(a), ib = id_of(b);
    if (ia == ib) throw DataError("profile '" + name_ + "': label paired with itself: " + a);
    inverse_[ia] = ib;
    inverse_[ib] = ia;
  }
  for (std::size_t i = 0; i < inverse_.size(); ++i) {
    if (inverse_[inverse_[i]] != static_cast<LabelId>(i))
      throw DataError("profile '" + name_ + "': inverse mapping is not an involution");
  }

  canonical_.assign(labels_.size(), false);
  for (const auto& n : canonical) canonical_[id_of(n)] = true;
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    LabelId id = static_cast<LabelId>(i);
    LabelId inv = inverse_[i];
    if (inv == id) {
      if (!canonical_[i])
        throw DataError("profile '" + name_ + "': self-inverse label must be canonical: " + labels_[i].name);
    } else if (canonical_[id] == canonical_[inv]) {
      throw DataError("profile '" + name_ + "': exactly one of {" + labels_[id].name +
                      ", " + labels_[inv].name + "} must be canonical");
    }
  }
}

bool DatasetProfile::has_label(const std::string& label_name) const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [&](const RelationLabel& l) { return l.name == label_name; });
}

LabelId DatasetProfile::id_of(const std::string& label_name) const {
  for (const auto& l : labels_)
    if (l.name == label_name) return l.id;
  throw DataError("profile '" + name_ + "': unknown label name " + label_name);
}

const std::string& DatasetProfile::name_of(LabelId id) const {
  check_id(id);
  return labels_[id].name;
}

void DatasetProfile::check_id(LabelId id) const {
  if (id < 0 || id >= label_count())
    throw DataError("profile '" + name_ + "': label id out of range: " + std::to_string(id));
}

LabelId DatasetProfile::inverse(LabelId id) const {
  check_id(id);
  return inverse_[id];
}

bool DatasetProfile::is_self_inverse(LabelId id) const {
  check_id(id);
  return inverse_[id] == id;
}

bool DatasetProfile::is_canonical(LabelId id) const {
  check_id(id);
  if (id == kNoneLabel) throw DataError("profile '" + name_ + "': is_canonical(NONE) is undefined");
  return canonical_[id];
}

namespace {

std::map<std::string, DatasetProfile>& registry() {
  static std::map<std::string, DatasetProfile> profiles = [] {
    std::map<std::string, DatasetProfile> m;
    // Label-id order follows the relation-set table order so checkpoints are
    // reproducible. BEFORE is the canonical side of BEFORE/AFTER, INCLUDES of
    // INCLUDES/IS_INCLUDED.
    m.emplace("tbdense",
              DatasetProfile("tbdense",
                             {"BEFORE", "AFTER", "SIMULTANEOUS", "VAGUE", "INCLUDES", "IS_INCLUDED"},
                             {{"BEFORE", "AFTER"}, {"INCLUDES", "IS_INCLUDED"}},
                             {"BEFORE", "SIMULTANEOUS", "VAGUE", "INCLUDES"}));
    m.emplace("matres",
              DatasetProfile("matres",
                             {"BEFORE", "AFTER", "SIMULTANEOUS", "VAGUE"},
                             {{"BEFORE", "AFTER"}},
                             {"BEFORE", "SIMULTANEOUS", "VAGUE"}));
    return m;
  }();
  return profiles;
}

}  // namespace

const DatasetProfile& profile(const std::string& name) {
  auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw UsageError("unknown dataset profile: " + name);
  return it->second;
}

void register_profile(DatasetProfile p) {
  std::string name = p.name();
  auto [it, inserted] = registry().emplace(name, std::move(p));
  if (!inserted) throw UsageError("profile already registered: " + name);
}

}  // namespace temprel
