#pragma once

// Shared in-memory fixtures for the unit and acceptance suites.

#include <vector>

#include "vfkit/graph_of_groups.hpp"

namespace fixtures {

using namespace vfkit;

inline std::vector<std::vector<Elt>> cyclic_table(int n) {
  std::vector<std::vector<Elt>> t(n, std::vector<Elt>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  return t;
}

// S3 as {id, r, r2, s, sr, sr2} with r^3 = s^2 = 1, s r s = r^2.
inline std::vector<std::vector<Elt>> s3_table() {
  auto mulperm = [](const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> c(3);
    for (int i = 0; i < 3; ++i) c[i] = a[b[i]];
    return c;
  };
  std::vector<std::vector<int>> elems = {
      {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  std::vector<std::vector<Elt>> t(6, std::vector<Elt>(6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      auto p = mulperm(elems[i], elems[j]);
      for (int k = 0; k < 6; ++k)
        if (elems[k] == p) t[i][j] = k;
    }
  return t;
}

// Rose with k loop pairs at one vertex, all groups trivial: free group F_k.
inline GraphOfGroups rose(int k) {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  for (int i = 0; i < k; ++i) raw.y.add_edge_pair(0, 0);
  raw.vertex_tables = {{{0}}};
  raw.edge_tables.assign(k, {{0}});
  raw.alpha_maps.assign(2 * k, {0});
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// Two vertices joined by three edge pairs, trivial groups: F_2 again.
inline GraphOfGroups theta() {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  raw.y.add_vertex();
  raw.y.add_edge_pair(0, 1);
  raw.y.add_edge_pair(0, 1);
  raw.y.add_edge_pair(0, 1);
  raw.vertex_tables = {{{0}}, {{0}}};
  raw.edge_tables.assign(3, {{0}});
  raw.alpha_maps.assign(6, {0});
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// Circle with n vertices, trivial groups: the integers.
inline GraphOfGroups circle(int n) {
  RawGraphOfGroups raw;
  for (int i = 0; i < n; ++i) raw.y.add_vertex();
  for (int i = 0; i < n; ++i) raw.y.add_edge_pair(i, (i + 1) % n);
  raw.vertex_tables.assign(n, {{0}});
  raw.edge_tables.assign(n, {{0}});
  raw.alpha_maps.assign(2 * n, {0});
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// Free product of two cyclic groups over a trivial edge group.
inline GraphOfGroups free_product(int m, int n) {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  raw.y.add_vertex();
  raw.y.add_edge_pair(0, 1);
  raw.vertex_tables = {cyclic_table(m), cyclic_table(n)};
  raw.edge_tables = {{{0}}};
  raw.alpha_maps = {{0}, {0}};
  raw.base_vertex = 0;
  return validate_gog(raw);
}

inline GraphOfGroups z2_z3() { return free_product(2, 3); }
inline GraphOfGroups z2_z2() { return free_product(2, 2); }

// Z/4 *_{Z/2} Z/6: edge group Z/2 embeds as {0,2} in Z/4 and {0,3} in Z/6.
inline GraphOfGroups z4_z6_over_z2() {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  raw.y.add_vertex();
  raw.y.add_edge_pair(0, 1);
  raw.vertex_tables = {cyclic_table(4), cyclic_table(6)};
  raw.edge_tables = {cyclic_table(2)};
  raw.alpha_maps = {{0, 2}, {0, 3}};
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// HNN extension of Z/2 with trivial associated subgroups: Z/2 * Z.
inline GraphOfGroups hnn_z2_trivial() {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  raw.y.add_edge_pair(0, 0);
  raw.vertex_tables = {cyclic_table(2)};
  raw.edge_tables = {{{0}}};
  raw.alpha_maps = {{0}, {0}};
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// HNN extension of Z/4 with both associated subgroups {0,2}.
inline GraphOfGroups hnn_z4_over_z2() {
  RawGraphOfGroups raw;
  raw.y.add_vertex();
  raw.y.add_edge_pair(0, 0);
  raw.vertex_tables = {cyclic_table(4)};
  raw.edge_tables = {cyclic_table(2)};
  raw.alpha_maps = {{0, 2}, {0, 2}};
  raw.base_vertex = 0;
  return validate_gog(raw);
}

// Convenience: build a loop word at the base vertex from (edge, coeff) pairs.
inline GWord loop(const GraphOfGroups& g, Elt head, std::vector<GSyllable> tail) {
  GWord w;
  w.base = g.base_vertex;
  w.head = head;
  w.tail = std::move(tail);
  if (!gword_valid(g, w)) throw std::logic_error("fixture word invalid: " + debug_string(w));
  return w;
}

// In a rose, loop i has positive edge 2i; stable-letter style helpers.
inline GWord rose_letter(const GraphOfGroups& g, int i, bool inverse = false) {
  return loop(g, 0, {{inverse ? 2 * i + 1 : 2 * i, 0}});
}

inline GWord rose_word(const GraphOfGroups& g, const std::vector<int>& letters) {
  // letters: positive k means loop k, negative k means inverse of loop -k-1.
  GWord w = identity_word(g.base_vertex);
  for (int k : letters) {
    GWord piece = k >= 0 ? rose_letter(g, k) : rose_letter(g, -k - 1, true);
    w = concatenate(g, w, piece);
  }
  return normal_form(g, w);
}

// In a one-edge amalgam with base vertex 0: a = vertex-0 element, b = vertex-1
// element reached through the edge.
inline GWord amalgam_a(const GraphOfGroups& g, Elt x) { return loop(g, x, {}); }

inline GWord amalgam_b(const GraphOfGroups& g, Elt x) {
  return normal_form(g, loop(g, 0, {{0, x}, {1, 0}}));
}

}  // namespace fixtures
