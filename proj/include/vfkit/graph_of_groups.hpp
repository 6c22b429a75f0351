#pragma once

#include <string>
#include <vector>

#include "vfkit/errors.hpp"
#include "vfkit/finite_group.hpp"
#include "vfkit/rng.hpp"
#include "vfkit/serre_graph.hpp"

namespace vfkit {

// (Gamma, Y): finite connected graph with a finite group per vertex, a finite
// group per edge pair and an embedding of each edge group into both endpoint
// vertex groups. Immutable after validate_gog.
struct GraphOfGroups {
  SerreGraph y;
  std::vector<FiniteGroup> vertex_groups;     // per vertex
  std::vector<FiniteGroup> edge_pair_groups;  // per positive edge index e/2
  std::vector<Monomorphism> alpha;            // per directed edge: G_e -> G_src(e)
  VertexId base_vertex = 0;
  std::vector<EdgeId> spanning;               // positive ids of a maximal subtree

  const FiniteGroup& vgroup(VertexId v) const { return vertex_groups[v]; }
  const FiniteGroup& egroup(EdgeId e) const { return edge_pair_groups[e >> 1]; }
  const Monomorphism& alpha_of(EdgeId e) const { return alpha[e]; }
  // omega_e = alpha_{e^-1}: G_e -> G_dst(e).
  const Monomorphism& omega_of(EdgeId e) const { return alpha[SerreGraph::inv(e)]; }

  // Per directed edge e, over g in G_src(e): the minimal element of the left
  // coset g*alpha_e(G_e), the c with g = rep*alpha_e(c), and membership in
  // the image. These pin all normal forms.
  std::vector<std::vector<Elt>> coset_rep;
  std::vector<std::vector<Elt>> coset_twist;
  std::vector<std::vector<Elt>> image_inv;  // g -> c with g = alpha_e(c), else -1
  std::vector<std::vector<Elt>> transversal;

  bool in_image(EdgeId e, Elt g) const { return image_inv[e][g] >= 0; }
  bool all_groups_trivial() const {
    for (const auto& g : vertex_groups)
      if (g.order != 1) return false;
    return true;
  }
  int max_edge_group_order() const {  // m' in the intersection bound
    int m = 1;
    for (const auto& g : edge_pair_groups) m = std::max(m, g.order);
    return m;
  }
};

struct RawGraphOfGroups {
  SerreGraph y;
  std::vector<std::vector<std::vector<Elt>>> vertex_tables;  // per vertex
  // Edge group tables: either one per positive edge, or one per directed edge
  // (in which case the two tables of a pair must coincide).
  std::vector<std::vector<std::vector<Elt>>> edge_tables;
  std::vector<std::vector<Elt>> alpha_maps;  // per directed edge
  VertexId base_vertex = 0;
};

inline GraphOfGroups validate_gog(const RawGraphOfGroups& raw) {
  GraphOfGroups g;
  g.y = raw.y;
  g.y.require_connected();
  if (static_cast<int>(raw.vertex_tables.size()) != g.y.num_vertices())
    throw SchemaError("need one vertex group per vertex");
  const int pairs = g.y.num_positive_edges();
  if (static_cast<int>(raw.edge_tables.size()) != pairs &&
      static_cast<int>(raw.edge_tables.size()) != 2 * pairs)
    throw SchemaError("need one edge group per edge pair");
  if (static_cast<int>(raw.alpha_maps.size()) != 2 * pairs)
    throw SchemaError("need one embedding per directed edge");
  if (raw.base_vertex < 0 || raw.base_vertex >= g.y.num_vertices())
    throw SchemaError("base vertex out of range");

  for (const auto& t : raw.vertex_tables) g.vertex_groups.push_back(validate_group(t));
  if (static_cast<int>(raw.edge_tables.size()) == 2 * pairs) {
    for (int i = 0; i < pairs; ++i)
      if (raw.edge_tables[2 * i] != raw.edge_tables[2 * i + 1])
        throw EdgePairGroupMismatch("edge groups of pair " + std::to_string(i) + " differ");
    for (int i = 0; i < pairs; ++i) g.edge_pair_groups.push_back(validate_group(raw.edge_tables[2 * i]));
  } else {
    for (const auto& t : raw.edge_tables) g.edge_pair_groups.push_back(validate_group(t));
  }
  for (EdgeId e = 0; e < g.y.num_edges(); ++e)
    g.alpha.push_back(
        validate_mono(g.edge_pair_groups[e >> 1], g.vertex_groups[g.y.src(e)], raw.alpha_maps[e]));
  g.base_vertex = raw.base_vertex;
  g.spanning = spanning_tree(g.y, g.base_vertex);

  for (EdgeId e = 0; e < g.y.num_edges(); ++e) {
    const FiniteGroup& gv = g.vgroup(g.y.src(e));
    const FiniteGroup& ge = g.egroup(e);
    const Monomorphism& a = g.alpha[e];
    std::vector<Elt> rep(gv.order, -1), twist(gv.order, -1), iinv(gv.order, -1);
    std::vector<Elt> tr;
    for (Elt x = 0; x < gv.order; ++x) {
      if (rep[x] != -1) continue;
      tr.push_back(x);
      for (Elt c = 0; c < ge.order; ++c) {
        Elt m = gv.mul(x, a.map[c]);
        rep[m] = x;
        twist[m] = c;
      }
    }
    for (Elt c = 0; c < ge.order; ++c) iinv[a.map[c]] = c;
    g.coset_rep.push_back(std::move(rep));
    g.coset_twist.push_back(std::move(twist));
    g.image_inv.push_back(std::move(iinv));
    g.transversal.push_back(std::move(tr));
  }
  return g;
}

// Element of the fundamental groupoid in loop form: a start vertex, a head
// coefficient there, then alternating (edge, coefficient) syllables along a
// path in Y. Group elements are the words whose path is a loop at the base
// vertex. Immutable value type.
struct GSyllable {
  EdgeId edge = -1;
  Elt coeff = 0;

  bool operator==(const GSyllable& o) const { return edge == o.edge && coeff == o.coeff; }
};

struct GWord {
  VertexId base = 0;
  Elt head = 0;
  std::vector<GSyllable> tail;

  int length() const { return static_cast<int>(tail.size()); }  // edge syllables
  bool operator==(const GWord& o) const {
    return base == o.base && head == o.head && tail == o.tail;
  }
};

inline GWord identity_word(VertexId v) { return GWord{v, 0, {}}; }

inline VertexId end_vertex(const GraphOfGroups& g, const GWord& w) {
  return w.tail.empty() ? w.base : g.y.dst(w.tail.back().edge);
}

inline bool gword_valid(const GraphOfGroups& g, const GWord& w) {
  if (w.base < 0 || w.base >= g.y.num_vertices()) return false;
  if (w.head < 0 || w.head >= g.vgroup(w.base).order) return false;
  VertexId at = w.base;
  for (const GSyllable& s : w.tail) {
    if (s.edge < 0 || s.edge >= g.y.num_edges() || g.y.src(s.edge) != at) return false;
    at = g.y.dst(s.edge);
    if (s.coeff < 0 || s.coeff >= g.vgroup(at).order) return false;
  }
  return true;
}

// Britton condition: no subword e, c, e^-1 with c in the image of omega_e.
inline bool is_reduced(const GraphOfGroups& g, const GWord& w) {
  for (size_t i = 0; i + 1 < w.tail.size(); ++i) {
    EdgeId e = w.tail[i].edge;
    if (w.tail[i + 1].edge == SerreGraph::inv(e) && g.in_image(SerreGraph::inv(e), w.tail[i].coeff))
      return false;
  }
  return true;
}

// Removes pinches e, omega_e(c), e^-1 -> alpha_e(c) until reduced. The
// syllable count strictly decreases at each step, so this terminates.
inline GWord reduce(const GraphOfGroups& g, GWord w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i + 1 < w.tail.size(); ++i) {
      EdgeId e = w.tail[i].edge;
      EdgeId ebar = SerreGraph::inv(e);
      if (w.tail[i + 1].edge != ebar) continue;
      Elt c = g.image_inv[ebar][w.tail[i].coeff];
      if (c < 0) continue;
      // g_{i-1} * alpha_e(c) * g_{i+1} becomes one coefficient.
      const FiniteGroup& gv = g.vgroup(g.y.src(e));
      Elt merged = gv.mul(g.alpha_of(e).map[c], w.tail[i + 1].coeff);
      if (i == 0)
        w.head = gv.mul(w.head, merged);
      else
        w.tail[i - 1].coeff = gv.mul(w.tail[i - 1].coeff, merged);
      w.tail.erase(w.tail.begin() + i, w.tail.begin() + i + 2);
      changed = true;
      break;
    }
  }
  return w;
}

// Canonical form: reduced, and every coefficient standing before an edge is
// the minimal representative of its left coset mod that edge's image. The
// sweep pushes the coset part rightward across each edge; the final
// coefficient stays free. Two loop words represent the same element of the
// fundamental group iff their normal forms coincide componentwise.
inline GWord normal_form(const GraphOfGroups& g, GWord w) {
  w = reduce(g, w);
  for (size_t i = 0; i < w.tail.size(); ++i) {
    EdgeId e = w.tail[i].edge;
    Elt& before = (i == 0) ? w.head : w.tail[i - 1].coeff;
    Elt rep = g.coset_rep[e][before];
    Elt c = g.coset_twist[e][before];
    before = rep;
    const FiniteGroup& gw = g.vgroup(g.y.dst(e));
    w.tail[i].coeff = gw.mul(g.omega_of(e).map[c], w.tail[i].coeff);
  }
  return w;
}

inline bool is_normal(const GraphOfGroups& g, const GWord& w) {
  if (!is_reduced(g, w)) return false;
  for (size_t i = 0; i < w.tail.size(); ++i) {
    Elt before = (i == 0) ? w.head : w.tail[i - 1].coeff;
    if (g.coset_rep[w.tail[i].edge][before] != before) return false;
  }
  return true;
}

inline GWord invert(const GraphOfGroups& g, const GWord& w) {
  GWord out;
  out.base = end_vertex(g, w);
  Elt last = w.tail.empty() ? w.head : w.tail.back().coeff;
  out.head = g.vgroup(out.base).inv(last);
  for (size_t i = w.tail.size(); i-- > 0;) {
    Elt before = (i == 0) ? w.head : w.tail[i - 1].coeff;
    VertexId v = g.y.src(w.tail[i].edge);
    out.tail.push_back({SerreGraph::inv(w.tail[i].edge), g.vgroup(v).inv(before)});
  }
  return out;
}

// Path composition: end(a) must equal base(b).
inline GWord concatenate(const GraphOfGroups& g, const GWord& a, const GWord& b) {
  if (end_vertex(g, a) != b.base) throw BaseMismatch("paths do not compose");
  GWord out = a;
  if (out.tail.empty())
    out.head = g.vgroup(out.base).mul(out.head, b.head);
  else
    out.tail.back().coeff = g.vgroup(end_vertex(g, a)).mul(out.tail.back().coeff, b.head);
  out.tail.insert(out.tail.end(), b.tail.begin(), b.tail.end());
  return out;
}

inline GWord multiply(const GraphOfGroups& g, const GWord& a, const GWord& b) {
  if (a.base != b.base || end_vertex(g, a) != a.base || end_vertex(g, b) != b.base)
    throw BaseMismatch("multiply needs loops based at one vertex");
  return normal_form(g, concatenate(g, a, b));
}

inline bool equal(const GraphOfGroups& g, const GWord& a, const GWord& b) {
  if (a.base != b.base) throw BaseMismatch("comparing words at different base vertices");
  return normal_form(g, a) == normal_form(g, b);
}

inline bool is_identity(const GraphOfGroups& g, const GWord& w) {
  GWord n = normal_form(g, w);
  return n.tail.empty() && n.head == 0;
}

inline std::string debug_string(const GWord& w) {
  std::string s = "(" + std::to_string(w.base) + "|" + std::to_string(w.head);
  for (const GSyllable& syl : w.tail)
    s += " e" + std::to_string(syl.edge) + " " + std::to_string(syl.coeff);
  return s + ")";
}

// Letters of the presentation on vertex groups and stable letters t_e.
// A stable letter is stored as a directed edge: t_e for the positive edge,
// its inverse as the opposite edge.
struct SPresLetter {
  enum class Kind { VertexElement, Stable };
  Kind kind = Kind::VertexElement;
  VertexId v = -1;
  Elt g = 0;
  EdgeId e = -1;

  static SPresLetter vertex(VertexId v, Elt g) { return {Kind::VertexElement, v, g, -1}; }
  static SPresLetter stable(EdgeId e) { return {Kind::Stable, -1, 0, e}; }
};

using SPresWord = std::vector<SPresLetter>;

// Tree paths r_v from the base vertex inside the spanning subtree, as edge
// sequences. Deterministic because the tree is.
inline std::vector<std::vector<EdgeId>> tree_paths(const GraphOfGroups& g) {
  std::vector<bool> in_tree(g.y.num_edges(), false);
  for (EdgeId e : g.spanning) in_tree[e] = in_tree[SerreGraph::inv(e)] = true;
  std::vector<std::vector<EdgeId>> to(g.y.num_vertices());
  std::vector<bool> seen(g.y.num_vertices(), false);
  std::vector<VertexId> queue{g.base_vertex};
  seen[g.base_vertex] = true;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    VertexId v = queue[qi];
    for (EdgeId e = 0; e < g.y.num_edges(); ++e) {
      if (!in_tree[e] || g.y.src(e) != v || seen[g.y.dst(e)]) continue;
      seen[g.y.dst(e)] = true;
      to[g.y.dst(e)] = to[v];
      to[g.y.dst(e)].push_back(e);
      queue.push_back(g.y.dst(e));
    }
  }
  return to;
}

// Interprets a presentation word as a based loop: a vertex letter (v, x)
// becomes r_v x r_v^-1 and a stable letter t_e becomes r_src(e) e r_dst(e)^-1,
// so stable letters of tree edges are trivial.
inline GWord from_spres(const SPresWord& word, const GraphOfGroups& g) {
  std::vector<std::vector<EdgeId>> paths = tree_paths(g);
  GWord acc = identity_word(g.base_vertex);
  auto append_path = [&](GWord& w, const std::vector<EdgeId>& p, bool inverted) {
    if (!inverted) {
      for (EdgeId e : p) w.tail.push_back({e, 0});
    } else {
      for (auto it = p.rbegin(); it != p.rend(); ++it)
        w.tail.push_back({SerreGraph::inv(*it), 0});
    }
  };
  for (const SPresLetter& letter : word) {
    GWord piece = identity_word(g.base_vertex);
    if (letter.kind == SPresLetter::Kind::VertexElement) {
      if (letter.v < 0 || letter.v >= g.y.num_vertices())
        throw UnknownElement("vertex " + std::to_string(letter.v) + " out of range");
      if (letter.g < 0 || letter.g >= g.vgroup(letter.v).order)
        throw UnknownElement("element " + std::to_string(letter.g) + " out of range at vertex " +
                             std::to_string(letter.v));
      append_path(piece, paths[letter.v], false);
      if (piece.tail.empty())
        piece.head = letter.g;
      else
        piece.tail.back().coeff = letter.g;
      append_path(piece, paths[letter.v], true);
    } else {
      if (letter.e < 0 || letter.e >= g.y.num_edges())
        throw UnknownEdge("edge " + std::to_string(letter.e) + " out of range");
      append_path(piece, paths[g.y.src(letter.e)], false);
      piece.tail.push_back({letter.e, 0});
      append_path(piece, paths[g.y.dst(letter.e)], true);
    }
    acc = concatenate(g, acc, piece);
  }
  return normal_form(g, acc);
}

// Random reduced loop at the base vertex with at most max_edges edge
// syllables; deterministic per seed. Used for corpus generation.
inline GWord random_element(const GraphOfGroups& g, int max_edges, std::uint64_t seed) {
  Rng rng(seed);
  // Distance to base, for steering the walk home.
  std::vector<int> dist(g.y.num_vertices(), -1);
  dist[g.base_vertex] = 0;
  std::vector<VertexId> queue{g.base_vertex};
  for (size_t qi = 0; qi < queue.size(); ++qi)
    for (EdgeId e = 0; e < g.y.num_edges(); ++e)
      if (g.y.src(e) == queue[qi] && dist[g.y.dst(e)] < 0) {
        dist[g.y.dst(e)] = dist[queue[qi]] + 1;
        queue.push_back(g.y.dst(e));
      }

  for (int attempt = 0; attempt < 64; ++attempt) {
    int target = max_edges > 0 ? rng.below_int(max_edges + 1) : 0;
    GWord w = identity_word(g.base_vertex);
    w.head = rng.below_int(g.vgroup(g.base_vertex).order);
    VertexId at = g.base_vertex;
    bool stuck = false;
    for (int step = 0; step < target; ++step) {
      int left = target - step;
      std::vector<EdgeId> options;
      for (EdgeId e = 0; e < g.y.num_edges(); ++e) {
        if (g.y.src(e) != at || dist[g.y.dst(e)] > left - 1) continue;
        // Backtracking is a pinch unless the coefficient between the two
        // edges escapes the edge image.
        if (!w.tail.empty() && e == SerreGraph::inv(w.tail.back().edge) &&
            g.in_image(e, w.tail.back().coeff))
          continue;
        options.push_back(e);
      }
      if (options.empty()) {
        stuck = true;
        break;
      }
      EdgeId e = options[rng.below_int(static_cast<int>(options.size()))];
      at = g.y.dst(e);
      w.tail.push_back({e, rng.below_int(g.vgroup(at).order)});
    }
    if (stuck || at != g.base_vertex) continue;
    GWord n = normal_form(g, w);
    if (gword_valid(g, n)) return n;
  }
  return identity_word(g.base_vertex);
}

}  // namespace vfkit
