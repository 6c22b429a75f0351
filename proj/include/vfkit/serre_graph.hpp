#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "vfkit/errors.hpp"

namespace vfkit {

using VertexId = int;
using EdgeId = int;

// Graph in Serre's formalism: every edge comes with a distinct inverse edge.
// Directed edge ids are allocated in pairs, inv(e) == e^1, and the even edge
// of each pair is the positively oriented one.
class SerreGraph {
 public:
  SerreGraph() = default;
  explicit SerreGraph(int vertices) : nv_(vertices) {}

  VertexId add_vertex() { return nv_++; }

  // Adds the pair {e, e^-1}; returns the positive (even) id.
  EdgeId add_edge_pair(VertexId u, VertexId v) {
    src_.push_back(u);
    src_.push_back(v);
    EdgeId e = static_cast<EdgeId>(src_.size()) - 2;
    return e;
  }

  int num_vertices() const { return nv_; }
  int num_edges() const { return static_cast<int>(src_.size()); }  // directed
  int num_positive_edges() const { return num_edges() / 2; }

  static EdgeId inv(EdgeId e) { return e ^ 1; }
  static bool is_positive(EdgeId e) { return (e & 1) == 0; }
  static EdgeId positive_of(EdgeId e) { return e & ~1; }

  VertexId src(EdgeId e) const { return src_[e]; }
  VertexId dst(EdgeId e) const { return src_[e ^ 1]; }

  // Number of directed edges beginning at v; a positive loop contributes 2.
  int degree(VertexId v) const {
    int d = 0;
    for (EdgeId e = 0; e < num_edges(); ++e)
      if (src_[e] == v) ++d;
    return d;
  }

  std::vector<EdgeId> edges_from(VertexId v) const {
    std::vector<EdgeId> out;
    for (EdgeId e = 0; e < num_edges(); ++e)
      if (src_[e] == v) out.push_back(e);
    return out;
  }

  // Throws Disconnected with a witness pair unless the graph is connected.
  void require_connected() const {
    if (nv_ == 0) return;
    std::vector<bool> seen(nv_, false);
    std::queue<VertexId> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (EdgeId e = 0; e < num_edges(); ++e)
        if (src_[e] == v && !seen[dst(e)]) {
          seen[dst(e)] = true;
          q.push(dst(e));
        }
    }
    for (VertexId v = 0; v < nv_; ++v)
      if (!seen[v]) throw Disconnected(0, v, "graph is not connected");
  }

  bool is_connected() const {
    try {
      require_connected();
    } catch (const Disconnected&) {
      return false;
    }
    return true;
  }

 private:
  int nv_ = 0;
  std::vector<VertexId> src_;  // per directed edge; dst via the inverse edge
};

// An edge path; the empty path carries only its start vertex.
struct Path {
  VertexId start = 0;
  std::vector<EdgeId> edges;

  bool trivial() const { return edges.empty(); }
};

inline VertexId path_end(const SerreGraph& g, const Path& p) {
  return p.edges.empty() ? p.start : g.dst(p.edges.back());
}

inline bool path_valid(const SerreGraph& g, const Path& p) {
  VertexId at = p.start;
  for (EdgeId e : p.edges) {
    if (e < 0 || e >= g.num_edges() || g.src(e) != at) return false;
    at = g.dst(e);
  }
  return true;
}

// Deletes subpaths e,e^-1 until none remain. Idempotent; keeps the start
// vertex even when everything cancels.
inline Path reduce_path(const SerreGraph& g, const Path& p) {
  Path out;
  out.start = p.start;
  for (EdgeId e : p.edges) {
    if (!out.edges.empty() && out.edges.back() == SerreGraph::inv(e))
      out.edges.pop_back();
    else
      out.edges.push_back(e);
  }
  return out;
}

inline bool is_reduced(const Path& p) {
  for (size_t i = 0; i + 1 < p.edges.size(); ++i)
    if (p.edges[i + 1] == SerreGraph::inv(p.edges[i])) return false;
  return true;
}

// Closed paths only; trivial paths count as cyclically reduced.
inline bool is_cyclically_reduced(const SerreGraph& g, const Path& p) {
  if (path_end(g, p) != p.start) throw NotClosed("path is not closed");
  if (p.trivial()) return true;
  if (!is_reduced(p)) return false;
  return p.edges.front() != SerreGraph::inv(p.edges.back());
}

// BFS spanning tree rooted at `root`, scanning directed edges in ascending
// id order. Returns the set of positive edge ids in the tree.
inline std::vector<EdgeId> spanning_tree(const SerreGraph& g, VertexId root) {
  g.require_connected();
  std::vector<bool> seen(g.num_vertices(), false);
  std::vector<EdgeId> tree;
  std::queue<VertexId> q;
  seen[root] = true;
  q.push(root);
  while (!q.empty()) {
    VertexId v = q.front();
    q.pop();
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (g.src(e) != v || seen[g.dst(e)]) continue;
      seen[g.dst(e)] = true;
      tree.push_back(SerreGraph::positive_of(e));
      q.push(g.dst(e));
    }
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

// |E+| - |V| + 1 for a finite connected graph.
inline int fundamental_rank(const SerreGraph& g) {
  g.require_connected();
  return g.num_positive_edges() - g.num_vertices() + 1;
}

struct GraphMorphism {
  const SerreGraph* domain = nullptr;
  const SerreGraph* codomain = nullptr;
  std::vector<VertexId> vertex_map;
  std::vector<EdgeId> edge_map;

  bool valid() const {
    if (!domain || !codomain) return false;
    if (static_cast<int>(vertex_map.size()) != domain->num_vertices()) return false;
    if (static_cast<int>(edge_map.size()) != domain->num_edges()) return false;
    for (EdgeId e = 0; e < domain->num_edges(); ++e) {
      EdgeId f = edge_map[e];
      if (f < 0 || f >= codomain->num_edges()) return false;
      if (codomain->src(f) != vertex_map[domain->src(e)]) return false;
      if (codomain->dst(f) != vertex_map[domain->dst(e)]) return false;
      if (edge_map[SerreGraph::inv(e)] != SerreGraph::inv(f)) return false;
    }
    return true;
  }
};

struct LocalInjectivity {
  bool injective = true;
  EdgeId witness_a = -1;  // two domain edges with a common start mapping equal
  EdgeId witness_b = -1;
};

inline LocalInjectivity is_locally_injective(const GraphMorphism& m) {
  const SerreGraph& d = *m.domain;
  for (VertexId v = 0; v < d.num_vertices(); ++v) {
    std::vector<EdgeId> out = d.edges_from(v);
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j)
        if (m.edge_map[out[i]] == m.edge_map[out[j]])
          return {false, out[i], out[j]};
  }
  return {};
}

// Core of a connected non-tree graph plus the embedding into the original.
struct CoreResult {
  SerreGraph core;
  GraphMorphism embedding;              // core -> original
  std::vector<VertexId> vertex_map;     // core vertex -> original vertex
  std::vector<EdgeId> edge_map;         // core directed edge -> original
};

// Maximal subgraph with minimum degree >= 2, by iterated leaf deletion.
// Equals the union of all cyclically reduced closed paths (property-tested
// against exhaustive enumeration at small scale). Throws IsATree when the
// input has no cycle.
inline CoreResult core(const SerreGraph& g) {
  g.require_connected();
  std::vector<bool> dead_v(g.num_vertices(), false);
  std::vector<bool> dead_e(g.num_edges(), false);
  std::vector<int> deg(g.num_vertices(), 0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) ++deg[g.src(e)];
  std::queue<VertexId> q;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (deg[v] <= 1) q.push(v);
  while (!q.empty()) {
    VertexId v = q.front();
    q.pop();
    if (dead_v[v] || deg[v] > 1) continue;
    dead_v[v] = true;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (dead_e[e] || g.src(e) != v) continue;
      dead_e[e] = dead_e[SerreGraph::inv(e)] = true;
      --deg[v];
      VertexId w = g.dst(e);
      if (!dead_v[w]) {
        --deg[w];
        if (deg[w] <= 1) q.push(w);
      }
    }
  }
  int alive = 0;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!dead_v[v]) ++alive;
  if (alive == 0) throw IsATree("graph is a tree; its core is empty");

  CoreResult r;
  std::vector<VertexId> new_id(g.num_vertices(), -1);
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!dead_v[v]) {
      new_id[v] = r.core.add_vertex();
      r.vertex_map.push_back(v);
    }
  std::vector<EdgeId> new_edge(g.num_edges(), -1);
  for (EdgeId e = 0; e < g.num_edges(); e += 2) {
    if (dead_e[e]) continue;
    EdgeId f = r.core.add_edge_pair(new_id[g.src(e)], new_id[g.dst(e)]);
    new_edge[e] = f;
    new_edge[e + 1] = f + 1;
    r.edge_map.push_back(e);
    r.edge_map.push_back(e + 1);
  }
  r.embedding.domain = nullptr;  // filled by callers that keep both graphs alive
  r.embedding.codomain = nullptr;
  r.embedding.vertex_map = r.vertex_map;
  r.embedding.edge_map = r.edge_map;
  return r;
}

// Free generators q_e = r_src(e) . e . r_dst(e)^-1 of pi_1(g, root), one per
// positive edge outside the spanning tree, each freely reduced.
inline std::vector<Path> free_generator_paths(const SerreGraph& g, VertexId root,
                                              const std::vector<EdgeId>& tree) {
  g.require_connected();
  std::vector<bool> in_tree(g.num_edges(), false);
  for (EdgeId e : tree) in_tree[e] = in_tree[SerreGraph::inv(e)] = true;
  // Tree path from root to every vertex.
  std::vector<Path> to(g.num_vertices());
  std::vector<bool> seen(g.num_vertices(), false);
  std::queue<VertexId> q;
  seen[root] = true;
  to[root].start = root;
  q.push(root);
  while (!q.empty()) {
    VertexId v = q.front();
    q.pop();
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (!in_tree[e] || g.src(e) != v || seen[g.dst(e)]) continue;
      seen[g.dst(e)] = true;
      to[g.dst(e)] = to[v];
      to[g.dst(e)].edges.push_back(e);
      q.push(g.dst(e));
    }
  }
  std::vector<Path> gens;
  for (EdgeId e = 0; e < g.num_edges(); e += 2) {
    if (in_tree[e]) continue;
    Path p = to[g.src(e)];
    p.edges.push_back(e);
    const Path& back = to[g.dst(e)];
    for (auto it = back.edges.rbegin(); it != back.edges.rend(); ++it)
      p.edges.push_back(SerreGraph::inv(*it));
    gens.push_back(reduce_path(g, p));
  }
  return gens;
}

// Exact isomorphism test respecting src/dst/inv, with optional vertex labels
// that the bijection must preserve and an optional required root pair.
// The public entry point enforces the desk-scale cap.
inline bool isomorphic_impl(const SerreGraph& a, const SerreGraph& b,
                            const std::vector<int>* labels_a,
                            const std::vector<int>* labels_b,
                            const std::vector<int>* edge_labels_a,
                            const std::vector<int>* edge_labels_b,
                            VertexId root_a = -1, VertexId root_b = -1) {
  if (a.num_vertices() != b.num_vertices()) return false;
  if (a.num_edges() != b.num_edges()) return false;
  const int n = a.num_vertices();
  if (n == 0) return true;
  // Degree (and label) multisets must match.
  auto profile = [](const SerreGraph& g, const std::vector<int>* labels) {
    std::vector<std::pair<int, int>> p;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      p.emplace_back(g.degree(v), labels ? (*labels)[v] : 0);
    std::sort(p.begin(), p.end());
    return p;
  };
  if (profile(a, labels_a) != profile(b, labels_b)) return false;

  std::vector<VertexId> vmap(n, -1), vused(n, 0);
  std::vector<EdgeId> emap(a.num_edges(), -1);
  std::vector<char> eused(b.num_edges(), 0);

  auto elabel = [&](const std::vector<int>* labels, EdgeId e) {
    return labels ? (*labels)[e] : 0;
  };

  // Backtracking over positive edges; vertices assigned on the fly.
  std::function<bool(EdgeId)> go = [&](EdgeId e) -> bool {
    while (e < a.num_edges() && emap[e] != -1) e += 2;
    if (e >= a.num_edges()) {
      // All edges matched; extend over isolated vertices.
      std::function<bool(VertexId)> fill = [&](VertexId v) -> bool {
        while (v < n && vmap[v] != -1) ++v;
        if (v >= n) return true;
        for (VertexId w = 0; w < n; ++w) {
          if (vused[w]) continue;
          if (labels_a && (*labels_a)[v] != (*labels_b)[w]) continue;
          if (a.degree(v) != b.degree(w)) continue;
          vmap[v] = w;
          vused[w] = 1;
          if (fill(v + 1)) return true;
          vmap[v] = -1;
          vused[w] = 0;
        }
        return false;
      };
      return fill(0);
    }
    VertexId sa = a.src(e), da = a.dst(e);
    for (EdgeId f = 0; f < b.num_edges(); ++f) {
      if (eused[f]) continue;
      if (elabel(edge_labels_a, e) != elabel(edge_labels_b, f)) continue;
      // Try e -> f (either orientation of the b pair shows up as f directly).
      VertexId sb = b.src(f), db = b.dst(f);
      bool set_s = false, set_d = false;
      if (vmap[sa] == -1) {
        if (vused[sb] || (labels_a && (*labels_a)[sa] != (*labels_b)[sb]) ||
            a.degree(sa) != b.degree(sb))
          continue;
        vmap[sa] = sb;
        vused[sb] = 1;
        set_s = true;
      } else if (vmap[sa] != sb) {
        continue;
      }
      if (vmap[da] == -1) {
        if (vused[db] || (labels_a && (*labels_a)[da] != (*labels_b)[db]) ||
            a.degree(da) != b.degree(db)) {
          if (set_s) {
            vused[vmap[sa]] = 0;
            vmap[sa] = -1;
          }
          continue;
        }
        vmap[da] = db;
        vused[db] = 1;
        set_d = true;
      } else if (vmap[da] != db) {
        if (set_s) {
          vused[vmap[sa]] = 0;
          vmap[sa] = -1;
        }
        continue;
      }
      emap[e] = f;
      emap[e ^ 1] = f ^ 1;
      eused[f] = eused[f ^ 1] = 1;
      if (go(e + 2)) return true;
      emap[e] = emap[e ^ 1] = -1;
      eused[f] = eused[f ^ 1] = 0;
      if (set_d) {
        vused[vmap[da]] = 0;
        vmap[da] = -1;
      }
      if (set_s) {
        vused[vmap[sa]] = 0;
        vmap[sa] = -1;
      }
    }
    return false;
  };

  if (root_a >= 0) {
    if (labels_a && (*labels_a)[root_a] != (*labels_b)[root_b]) return false;
    if (a.degree(root_a) != b.degree(root_b)) return false;
    vmap[root_a] = root_b;
    vused[root_b] = 1;
  }
  return go(0);
}

inline bool graphs_isomorphic(const SerreGraph& a, const SerreGraph& b) {
  if (a.num_vertices() > 64 || b.num_vertices() > 64)
    throw TooLarge("isomorphism test capped at 64 vertices");
  return isomorphic_impl(a, b, nullptr, nullptr, nullptr, nullptr);
}

// DOT rendering: one arrow per positive edge, inverse edges implied.
// Decorations are supplied by the caller per vertex / positive edge.
inline void write_dot(std::ostream& os, const SerreGraph& g,
                      const std::function<std::string(VertexId)>& vertex_label,
                      const std::function<std::string(EdgeId)>& edge_label = {},
                      const std::function<std::string(EdgeId)>& taillabel = {},
                      const std::function<std::string(EdgeId)>& headlabel = {}) {
  os << "digraph g {\n";
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    os << "  v" << v;
    if (vertex_label) os << " [label=\"" << vertex_label(v) << "\"]";
    os << ";\n";
  }
  for (EdgeId e = 0; e < g.num_edges(); e += 2) {
    os << "  v" << g.src(e) << " -> v" << g.dst(e) << " [";
    bool first = true;
    auto attr = [&](const char* k, const std::string& val) {
      if (val.empty()) return;
      if (!first) os << ", ";
      os << k << "=\"" << val << "\"";
      first = false;
    };
    attr("label", edge_label ? edge_label(e) : std::string());
    attr("taillabel", taillabel ? taillabel(e) : std::string());
    attr("headlabel", headlabel ? headlabel(e) : std::string());
    os << "];\n";
  }
  os << "}\n";
}

}  // namespace vfkit
