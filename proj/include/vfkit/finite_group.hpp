#pragma once

#include <string>
#include <vector>

#include "vfkit/errors.hpp"

namespace vfkit {

using Elt = int;  // element index; 0 is always the identity

inline constexpr int kMaxGroupOrder = 64;

// A finite group given extensionally by its multiplication table.
// Immutable after validate_group; safe to share across threads.
struct FiniteGroup {
  int order = 1;
  std::vector<std::vector<Elt>> product;  // product[i][j] = i*j
  std::vector<Elt> inverse;               // derived from the table
  std::vector<std::string> element_names; // optional, same length as order

  Elt mul(Elt a, Elt b) const { return product[a][b]; }
  Elt inv(Elt a) const { return inverse[a]; }
  bool is_trivial() const { return order == 1; }

  std::string name_of(Elt a) const {
    if (!element_names.empty()) return element_names[a];
    return std::to_string(a);
  }
};

// Checks all group axioms exhaustively and derives the inverse table.
// Index 0 must act as the identity.
inline FiniteGroup validate_group(const std::vector<std::vector<Elt>>& table) {
  const int n = static_cast<int>(table.size());
  if (n == 0) throw NotAGroup(NotAGroup::Reason::Identity, "empty multiplication table");
  if (n > kMaxGroupOrder)
    throw GroupTooLarge("group order " + std::to_string(n) + " exceeds cap " +
                        std::to_string(kMaxGroupOrder));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(table[i].size()) != n)
      throw NotAGroup(NotAGroup::Reason::LatinSquare,
                      "row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < n; ++j)
      if (table[i][j] < 0 || table[i][j] >= n)
        throw NotAGroup(NotAGroup::Reason::LatinSquare,
                        "entry (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  }
  for (int i = 0; i < n; ++i) {
    if (table[0][i] != i || table[i][0] != i)
      throw NotAGroup(NotAGroup::Reason::Identity,
                      "index 0 is not an identity at " + std::to_string(i));
  }
  // Latin square: every row and column is a permutation.
  for (int i = 0; i < n; ++i) {
    std::vector<bool> row(n, false), col(n, false);
    for (int j = 0; j < n; ++j) {
      if (row[table[i][j]])
        throw NotAGroup(NotAGroup::Reason::LatinSquare, "row " + std::to_string(i) + " repeats");
      row[table[i][j]] = true;
      if (col[table[j][i]])
        throw NotAGroup(NotAGroup::Reason::LatinSquare, "column " + std::to_string(i) + " repeats");
      col[table[j][i]] = true;
    }
  }
  FiniteGroup g;
  g.order = n;
  g.product = table;
  g.inverse.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (table[i][j] == 0) {
        g.inverse[i] = j;
        break;
      }
    if (g.inverse[i] < 0 || table[g.inverse[i]][i] != 0)
      throw NotAGroup(NotAGroup::Reason::Inverses, "no two-sided inverse for " + std::to_string(i));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (table[table[i][j]][k] != table[i][table[j][k]])
          throw NotAGroup(NotAGroup::Reason::Associativity,
                          "associativity fails at (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + ")");
  return g;
}

inline FiniteGroup trivial_group() { return validate_group({{0}}); }

inline FiniteGroup cyclic_group(int n) {
  std::vector<std::vector<Elt>> t(n, std::vector<Elt>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  return validate_group(t);
}

// An injective homomorphism source -> target, checked exhaustively.
struct Monomorphism {
  const FiniteGroup* source = nullptr;
  const FiniteGroup* target = nullptr;
  std::vector<Elt> map;  // source element -> target element

  Elt operator()(Elt a) const { return map[a]; }
};

inline Monomorphism validate_mono(const FiniteGroup& src, const FiniteGroup& tgt,
                                  const std::vector<Elt>& map) {
  if (static_cast<int>(map.size()) != src.order)
    throw NotHomomorphism("map is not total on the source group");
  for (Elt a : map)
    if (a < 0 || a >= tgt.order) throw NotHomomorphism("map value out of range");
  if (map[0] != 0) throw NotHomomorphism("map does not fix the identity");
  std::vector<bool> seen(tgt.order, false);
  for (int i = 0; i < src.order; ++i) {
    if (seen[map[i]])
      throw NotInjective("elements collide at image " + std::to_string(map[i]));
    seen[map[i]] = true;
  }
  for (int i = 0; i < src.order; ++i)
    for (int j = 0; j < src.order; ++j)
      if (map[src.mul(i, j)] != tgt.mul(map[i], map[j]))
        throw NotHomomorphism("not multiplicative at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
  Monomorphism m;
  m.source = &src;
  m.target = &tgt;
  m.map = map;
  return m;
}

inline Monomorphism compose(const Monomorphism& outer, const Monomorphism& inner) {
  std::vector<Elt> map(inner.source->order);
  for (int i = 0; i < inner.source->order; ++i) map[i] = outer.map[inner.map[i]];
  return validate_mono(*inner.source, *outer.target, map);
}

// Representatives of the left cosets t*image(mono), one per coset, each the
// minimal element index in its coset, listed in ascending order (so the
// identity comes first). This pins every normal form in the library.
inline std::vector<Elt> left_transversal(const Monomorphism& mono) {
  const FiniteGroup& tgt = *mono.target;
  std::vector<bool> covered(tgt.order, false);
  std::vector<Elt> reps;
  for (Elt g = 0; g < tgt.order; ++g) {
    if (covered[g]) continue;
    reps.push_back(g);
    for (Elt c = 0; c < mono.source->order; ++c) covered[tgt.mul(g, mono.map[c])] = true;
  }
  return reps;
}

}  // namespace vfkit
