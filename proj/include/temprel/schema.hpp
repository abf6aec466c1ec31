#pragma once

#include <string>
#include <vector>

#include "temprel/errors.hpp"

namespace temprel {

/// Dense relation label id. 0 is always NONE.
using LabelId = int;
inline constexpr LabelId kNoneLabel = 0;

struct RelationLabel {
  LabelId id = kNoneLabel;
  std::string name;
};

/// A closed relation vocabulary with an involutive inverse mapping and a
/// canonical side chosen for every invertible pair. Immutable once built.
class DatasetProfile {
 public:
  /// `inverse_pairs` lists mutually inverse label names; any label not in a
  /// pair is self-inverse. `canonical` names carry the outgoing arc in gold
  /// construction and must contain exactly one side of each invertible pair
  /// plus every self-inverse label.
  DatasetProfile(std::string name, std::vector<std::string> label_names,
                 std::vector<std::pair<std::string, std::string>> inverse_pairs,
                 std::vector<std::string> canonical);

  const std::string& name() const { return name_; }

  /// All labels in id order; labels()[0] is NONE.
  const std::vector<RelationLabel>& labels() const { return labels_; }
  /// Label count including the reserved NONE slot.
  int label_count() const { return static_cast<int>(labels_.size()); }
  int non_none_count() const { return label_count() - 1; }

  LabelId id_of(const std::string& label_name) const;
  const std::string& name_of(LabelId id) const;
  bool has_label(const std::string& label_name) const;

  /// INV(label); inverse(NONE) == NONE.
  LabelId inverse(LabelId id) const;
  bool is_self_inverse(LabelId id) const;
  /// True iff the label carries the outgoing arc. NONE is not allowed.
  bool is_canonical(LabelId id) const;

 private:
  void check_id(LabelId id) const;

  std::string name_;
  std::vector<RelationLabel> labels_;
  std::vector<LabelId> inverse_;
  std::vector<bool> canonical_;
};

/// Look up a built-in ("tbdense", "matres") or registered profile.
const DatasetProfile& profile(const std::string& name);

/// Register a user-defined profile. Not thread-safe against concurrent
/// lookups; call during startup.
void register_profile(DatasetProfile p);

}  // namespace temprel
