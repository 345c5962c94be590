#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proelm/errors.hpp"
#include "proelm/types.hpp"

namespace proelm {

// Ordered, append-only mapping from label name to output column index.
// Indices are dense and 0-based; a label's index never changes once assigned,
// which is what keeps old output columns meaningful when new labels arrive.
class LabelRegistry {
 public:
  LabelRegistry() = default;

  explicit LabelRegistry(std::vector<std::string> names) {
    for (auto& n : names) append(std::move(n));
  }

  Index count() const { return static_cast<Index>(names_.size()); }

  Index append(std::string name) {
    if (index_.count(name))
      throw ConflictError("label '" + name + "' is already registered");
    Index idx = count();
    index_.emplace(name, idx);
    names_.push_back(std::move(name));
    return idx;
  }

  std::optional<Index> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(Index idx) const {
    if (idx < 0 || idx >= count())
      throw InvalidArgumentError("label index " + std::to_string(idx) +
                                 " out of range [0, " + std::to_string(count()) + ")");
    return names_[static_cast<std::size_t>(idx)];
  }

  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const LabelRegistry& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

}  // namespace proelm
