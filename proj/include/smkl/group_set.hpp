#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "smkl/core.hpp"

namespace smkl {

/// Sorted set of 0-based group indices.  Rendered 1-based for humans.
class GroupSet {
 public:
  GroupSet() = default;
  explicit GroupSet(std::vector<Index> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  }

  bool contains(Index g) const { return std::binary_search(idx_.begin(), idx_.end(), g); }
  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  const std::vector<Index>& indices() const { return idx_; }

  bool is_subset_of(const GroupSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
  }

  /// "{1,3}" with 1-based labels.
  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(idx_[i] + 1);
    }
    return s + "}";
  }

  friend bool operator==(const GroupSet&, const GroupSet&) = default;

 private:
  std::vector<Index> idx_;
};

/// {g : alpha_g is not the zero vector}.  Exact test; relies on the solver
/// storing thresholded groups as literal zeros.
inline GroupSet nonzero_groups(const DualCoefficients& alpha) {
  std::vector<Index> idx;
  for (Index g = 0; g < alpha.num_groups(); ++g)
    if (!alpha.group_is_zero(g)) idx.push_back(g);
  return GroupSet(std::move(idx));
}

}  // namespace smkl
