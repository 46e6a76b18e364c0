#pragma once

// Bitmask view of a model's state graph. State ids are sorted
// lexicographically and mapped to bit positions, so masks are stable for a
// given id set regardless of document order.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"

namespace ofc {

using Mask = std::uint64_t;

constexpr int kMaxIndexedStates = 63;

class GraphIndex {
 public:
  explicit GraphIndex(const FsmModel& model) {
    for (const auto& s : model.states) ids_.push_back(s.id);
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    if (static_cast<int>(ids_.size()) > kMaxIndexedStates)
      throw Error(ErrorCode::TooLarge, "graph index holds at most " +
                                           std::to_string(kMaxIndexedStates) + " states");
    for (int i = 0; i < size(); ++i) pos_[ids_[i]] = i;
    succ_.assign(ids_.size(), 0);
    pred_.assign(ids_.size(), 0);
    auto it = pos_.find(model.initial_state);
    initial_ = it == pos_.end() ? -1 : it->second;
    for (const auto& t : model.transitions) {
      auto f = pos_.find(t.from);
      auto g = pos_.find(t.to);
      if (f == pos_.end() || g == pos_.end()) continue;
      if (f->second == g->second) {
        self_loops_ |= bit(f->second);
        continue;
      }
      succ_[f->second] |= bit(g->second);
      pred_[g->second] |= bit(f->second);
    }
  }

  static constexpr Mask bit(int i) { return Mask{1} << i; }

  int size() const { return static_cast<int>(ids_.size()); }
  Mask all() const { return size() == 64 ? ~Mask{0} : bit(size()) - 1; }
  int initial() const { return initial_; }
  const std::string& id(int i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }

  // Successors/predecessors other than the node itself.
  Mask succ(int i) const { return succ_[i]; }
  Mask pred(int i) const { return pred_[i]; }
  bool has_self_loop(int i) const { return (self_loops_ & bit(i)) != 0; }

  int position(const std::string& id) const {
    auto it = pos_.find(id);
    return it == pos_.end() ? -1 : it->second;
  }

  Mask mask_of(const NodeSet& nodes) const {
    Mask m = 0;
    for (const auto& n : nodes) {
      const int p = position(n);
      if (p < 0) throw Error(ErrorCode::NotASubset, "unknown state id '" + n + "'");
      m |= bit(p);
    }
    return m;
  }

  NodeSet nodes_of(Mask m) const {
    NodeSet out;
    for (int i = 0; i < size(); ++i)
      if (m & bit(i)) out.insert(ids_[i]);
    return out;
  }

  bool weakly_connected(Mask m) const {
    if (m == 0) return false;
    Mask seen = m & (~m + 1);
    Mask frontier = seen;
    while (frontier) {
      Mask next = 0;
      for (Mask f = frontier; f; f &= f - 1) {
        const int i = std::countr_zero(f);
        next |= (succ_[i] | pred_[i]) & m;
      }
      frontier = next & ~seen;
      seen |= next;
    }
    return seen == m;
  }

 private:
  std::vector<std::string> ids_;
  std::map<std::string, int> pos_;
  std::vector<Mask> succ_;
  std::vector<Mask> pred_;
  Mask self_loops_ = 0;
  int initial_ = -1;
};

}  // namespace ofc
