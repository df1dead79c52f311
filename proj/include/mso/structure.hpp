#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mso/errors.hpp"

namespace mso {

using Mask = std::uint64_t;

inline int popcount(Mask m) { return __builtin_popcountll(m); }
inline bool mask_subset(Mask a, Mask b) { return (a & ~b) == 0; }
inline int mask_single(Mask m) {
  return popcount(m) == 1 ? __builtin_ctzll(m) : -1;
}

// A finite chain 0 < 1 < ... < N-1, or a finite tree/forest given by parent
// links (the order is the strict ancestor order).  Predicate sets are
// bitmasks over the universe, so N is capped at 63.
class FiniteStructure {
 public:
  enum class Kind { Chain, Tree };

  static FiniteStructure chain(unsigned n);
  // parent[i] = parent node index, or -1 for a component top.
  static FiniteStructure tree(const std::vector<int>& parent);

  Kind kind() const { return kind_; }
  unsigned size() const { return size_; }
  bool is_chain() const { return kind_ == Kind::Chain; }
  Mask universe() const { return size_ == 64 ? ~0ull : ((1ull << size_) - 1); }

  // Strict order: chains compare positions, trees use strict ancestorship.
  bool less(unsigned x, unsigned y) const;
  // Reflexive order.
  bool leq(unsigned x, unsigned y) const { return x == y || less(x, y); }
  bool comparable(unsigned x, unsigned y) const {
    return x == y || less(x, y) || less(y, x);
  }

  int parent_of(unsigned x) const { return parent_.at(x); }
  // Strict ancestors of x as a mask (trees only).
  Mask ancestors(unsigned x) const { return anc_[x]; }

  const std::string& canon_key() const { return key_; }

  void set_named(const std::string& name, Mask m);
  Mask named(const std::string& name) const;
  bool has_named(const std::string& name) const { return named_.count(name) > 0; }
  const std::map<std::string, Mask>& named_sets() const { return named_; }

  // Concatenation of two chains (predicates are not carried over).
  static FiniteStructure concat(const FiniteStructure& a, const FiniteStructure& b);

 private:
  Kind kind_ = Kind::Chain;
  unsigned size_ = 0;
  std::vector<int> parent_;
  std::vector<Mask> anc_;
  std::map<std::string, Mask> named_;
  std::string key_;

  void finish();
};

// Shifts a subset of [0,n) by `offset` positions.
inline Mask mask_shift(Mask m, unsigned offset) { return m << offset; }

// Reads the tree file format: one line per node `id parent|-`, then named
// subsets as `NAME id id ...` lines.  Node ids are renumbered to 0..N-1 in
// file order; named sets refer to the original ids.
FiniteStructure parse_tree_file(const std::string& text);

// Chain file: first line `chain N`, then `NAME id id ...` subset lines.
FiniteStructure parse_chain_file(const std::string& text);

// AHU-style canonical code of a forest, invariant under isomorphism.
std::string tree_canonical_code(const FiniteStructure& t);

// All rooted forests with up to max_nodes nodes, one per isomorphism class.
std::vector<FiniteStructure> enumerate_forests(unsigned max_nodes);

// All maximal chains, each as a sorted node list (ascending order along the
// chain).  For forests each branch stays within one component.
std::vector<std::vector<unsigned>> branches_of(const FiniteStructure& t);

}  // namespace mso
