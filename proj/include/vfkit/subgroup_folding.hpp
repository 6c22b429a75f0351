#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vfkit/graph_of_groups.hpp"
#include "vfkit/serre_graph.hpp"

namespace vfkit {

// Decorated quotient graph of the Bass-Serre tree by a subgroup H.
//
// A block is a vertex of T/H carrying its full fiber of path-word classes as
// a right G_v-torsor: the element (B, x) times g is (B, x*g). A packet is a
// G_e-orbit of transitions between two blocks, i.e. a single edge of T/H over
// the edge type e; it is stored in the positive orientation with a canonical
// anchor transition (ax, ay), and carries the transition set
// {(ax*alpha_e(c), ay*omega_e(c)) : c in G_e}.
struct BlockElement {
  int block = 0;
  Elt x = 0;

  bool operator==(const BlockElement& o) const { return block == o.block && x == o.x; }
  bool operator!=(const BlockElement& o) const { return !(*this == o); }
};

struct BlockGraph {
  struct Block {
    VertexId type = 0;
  };
  struct Packet {
    EdgeId etype = 0;  // positive edge of Y
    int src = 0;       // block with type src(etype)
    int dst = 0;       // block with type dst(etype)
    Elt ax = 0;        // anchor transition, lexicographically least
    Elt ay = 0;
  };

  const GraphOfGroups* gog = nullptr;
  std::vector<Block> blocks;
  std::vector<Packet> packets;
  // Element identifications not yet realized by merging; fold consumes them.
  std::vector<std::pair<BlockElement, BlockElement>> pending;
  BlockElement basepoint;
  bool folded = false;

  const FiniteGroup& block_group(int b) const { return gog->vgroup(blocks[b].type); }

  // Underlying Serre graph: blocks become vertices, packet k becomes the
  // positive edge 2k.
  SerreGraph underlying() const {
    SerreGraph g(static_cast<int>(blocks.size()));
    for (const Packet& p : packets) g.add_edge_pair(p.src, p.dst);
    return g;
  }
};

namespace detail {

// Canonical anchor: the lexicographically least pair in the transition set.
inline void canonicalize_anchor(const GraphOfGroups& g, BlockGraph::Packet& p) {
  const FiniteGroup& ge = g.egroup(p.etype);
  const FiniteGroup& gs = g.vgroup(g.y.src(p.etype));
  const FiniteGroup& gd = g.vgroup(g.y.dst(p.etype));
  const Monomorphism& a = g.alpha_of(p.etype);
  const Monomorphism& w = g.omega_of(p.etype);
  Elt bx = p.ax, by = p.ay;
  for (Elt c = 0; c < ge.order; ++c) {
    Elt x = gs.mul(p.ax, a.map[c]);
    Elt y = gd.mul(p.ay, w.map[c]);
    if (x < bx || (x == bx && y < by)) {
      bx = x;
      by = y;
    }
  }
  p.ax = bx;
  p.ay = by;
}

}  // namespace detail

// Unfolded wedge of generator traces: one fresh block per edge syllable, the
// closing identification with the basepoint left pending for fold.
inline BlockGraph wedge(const GraphOfGroups& g, const std::vector<GWord>& generators) {
  BlockGraph b;
  b.gog = &g;
  b.blocks.push_back({g.base_vertex});
  b.basepoint = {0, 0};
  for (size_t i = 0; i < generators.size(); ++i) {
    GWord w = normal_form(g, generators[i]);
    if (w.base != g.base_vertex || end_vertex(g, w) != g.base_vertex)
      throw BaseMismatch("generator " + std::to_string(i) + " is not a loop at the base vertex");
    if (w.tail.empty() && w.head == 0)
      throw IdentityGenerator(static_cast<int>(i),
                              "generator " + std::to_string(i) + " is the identity");
    BlockElement cur{0, w.head};
    for (const GSyllable& s : w.tail) {
      int nb = static_cast<int>(b.blocks.size());
      b.blocks.push_back({g.y.dst(s.edge)});
      BlockGraph::Packet p;
      if (SerreGraph::is_positive(s.edge)) {
        p = {s.edge, cur.block, nb, cur.x, 0};
      } else {
        p = {SerreGraph::positive_of(s.edge), nb, cur.block, 0, cur.x};
      }
      detail::canonicalize_anchor(g, p);
      b.packets.push_back(p);
      cur = {nb, s.coeff};
    }
    b.pending.push_back({cur, b.basepoint});
  }
  return b;
}

enum class FoldOrder { Ascending, Descending };

// Merges until each element has at most one transition per edge type. A merge
// that identifies two distinct elements of one block witnesses a nontrivial
// intersection with a vertex-group conjugate and aborts with
// FreeActionViolation. Confluence over the scan order is property-tested.
inline BlockGraph fold(const BlockGraph& input, FoldOrder order = FoldOrder::Ascending) {
  const GraphOfGroups& g = *input.gog;
  std::vector<BlockGraph::Block> blocks = input.blocks;
  std::vector<BlockGraph::Packet> packets = input.packets;
  std::vector<char> alive(packets.size(), 1);

  // Union-find with left-translation offsets: element (b, z) is identified
  // with (parent[b], off[b] * z).
  std::vector<int> parent(blocks.size());
  std::vector<Elt> off(blocks.size(), 0);
  std::vector<int> size(blocks.size(), 1);
  for (size_t i = 0; i < blocks.size(); ++i) parent[i] = static_cast<int>(i);

  std::function<std::pair<int, Elt>(int)> find = [&](int v) -> std::pair<int, Elt> {
    if (parent[v] == v) return {v, 0};
    auto [root, lambda] = find(parent[v]);
    parent[v] = root;
    off[v] = g.vgroup(blocks[root].type).mul(lambda, off[v]);
    return {root, off[v]};
  };
  auto resolve = [&](BlockElement e) -> BlockElement {
    auto [root, lambda] = find(e.block);
    return {root, g.vgroup(blocks[root].type).mul(lambda, e.x)};
  };

  std::vector<std::pair<BlockElement, BlockElement>> queue = input.pending;

  auto identify = [&](BlockElement a, BlockElement c) {
    BlockElement ra = resolve(a);
    BlockElement rc = resolve(c);
    if (ra.block == rc.block) {
      if (ra.x != rc.x) {
        const FiniteGroup& gv = g.vgroup(blocks[ra.block].type);
        Elt twist = gv.mul(gv.inv(ra.x), rc.x);
        throw FreeActionViolation(
            blocks[ra.block].type, twist,
            "subgroup meets a conjugate of the vertex group at vertex " +
                std::to_string(blocks[ra.block].type) + " (twist " + std::to_string(twist) + ")");
      }
      return;
    }
    int keep = ra.block, drop = rc.block;
    BlockElement ek = ra, ed = rc;
    if (size[drop] > size[keep] || (size[drop] == size[keep] && drop < keep)) {
      std::swap(keep, drop);
      std::swap(ek, ed);
    }
    const FiniteGroup& gv = g.vgroup(blocks[keep].type);
    parent[drop] = keep;
    off[drop] = gv.mul(ek.x, gv.inv(ed.x));  // (drop, z) == (keep, ek.x * ed.x^-1 * z)
    size[keep] += size[drop];
  };

  for (;;) {
    // Drain pending identifications first.
    while (!queue.empty()) {
      auto [a, c] = queue.back();
      queue.pop_back();
      identify(a, c);
    }
    // Canonicalize packets into root coordinates.
    for (size_t i = 0; i < packets.size(); ++i) {
      if (!alive[i]) continue;
      BlockGraph::Packet& p = packets[i];
      BlockElement s = resolve({p.src, p.ax});
      BlockElement d = resolve({p.dst, p.ay});
      p.src = s.block;
      p.ax = s.x;
      p.dst = d.block;
      p.ay = d.x;
      detail::canonicalize_anchor(g, p);
    }
    // Determinism scan: at most one packet per (block, directed edge, coset).
    bool changed = false;
    std::map<std::tuple<int, EdgeId, Elt>, size_t> seen;
    std::vector<size_t> idx;
    for (size_t i = 0; i < packets.size(); ++i)
      if (alive[i]) idx.push_back(i);
    if (order == FoldOrder::Descending) std::reverse(idx.begin(), idx.end());
    for (size_t i : idx) {
      const BlockGraph::Packet& p = packets[i];
      EdgeId e = p.etype, ebar = SerreGraph::inv(p.etype);
      const FiniteGroup& ge = g.egroup(e);
      std::tuple<int, EdgeId, Elt> src_key{p.src, e, g.coset_rep[e][p.ax]};
      std::tuple<int, EdgeId, Elt> dst_key{p.dst, ebar, g.coset_rep[ebar][p.ay]};
      auto [it_s, fresh_s] = seen.try_emplace(src_key, i);
      if (!fresh_s && it_s->second != i) {
        const BlockGraph::Packet& q = packets[it_s->second];
        // Same source coset: align targets. q.ax = p.ax * alpha(c0).
        Elt c0 = ge.mul(ge.inv(g.coset_twist[e][p.ax]), g.coset_twist[e][q.ax]);
        const FiniteGroup& gd = g.vgroup(g.y.dst(e));
        queue.push_back({{p.dst, gd.mul(p.ay, g.omega_of(e).map[c0])}, {q.dst, q.ay}});
        alive[i] = 0;
        changed = true;
        continue;
      }
      auto [it_d, fresh_d] = seen.try_emplace(dst_key, i);
      if (!fresh_d && it_d->second != i) {
        const BlockGraph::Packet& q = packets[it_d->second];
        // Same target-side coset: align sources. q.ay = p.ay * omega(d0).
        Elt d0 = ge.mul(ge.inv(g.coset_twist[ebar][p.ay]), g.coset_twist[ebar][q.ay]);
        const FiniteGroup& gs = g.vgroup(g.y.src(e));
        queue.push_back({{p.src, gs.mul(p.ax, g.alpha_of(e).map[d0])}, {q.src, q.ax}});
        alive[i] = 0;
        changed = true;
        continue;
      }
    }
    if (queue.empty() && !changed) break;
  }

  // Compact into a BFS numbering from the basepoint block.
  BlockElement base = resolve(input.basepoint);
  std::vector<int> new_id(blocks.size(), -1);
  std::vector<int> bfs{base.block};
  new_id[base.block] = 0;
  for (size_t qi = 0; qi < bfs.size(); ++qi) {
    for (size_t i = 0; i < packets.size(); ++i) {
      if (!alive[i]) continue;
      for (int nb : {packets[i].src, packets[i].dst})
        if (packets[i].src == bfs[qi] || packets[i].dst == bfs[qi])
          if (new_id[nb] < 0) {
            new_id[nb] = static_cast<int>(bfs.size());
            bfs.push_back(nb);
          }
    }
  }

  BlockGraph out;
  out.gog = &g;
  out.folded = true;
  out.blocks.resize(bfs.size());
  for (size_t i = 0; i < bfs.size(); ++i) out.blocks[i] = blocks[bfs[i]];
  // Recoordinate the basepoint block so the basepoint element is (0, 0).
  std::vector<Elt> shift(bfs.size(), 0);
  shift[0] = g.vgroup(blocks[base.block].type).inv(base.x);
  for (size_t i = 0; i < packets.size(); ++i) {
    if (!alive[i]) continue;
    BlockGraph::Packet p = packets[i];
    p.src = new_id[p.src];
    p.dst = new_id[p.dst];
    p.ax = g.vgroup(g.y.src(p.etype)).mul(shift[p.src], p.ax);
    p.ay = g.vgroup(g.y.dst(p.etype)).mul(shift[p.dst], p.ay);
    detail::canonicalize_anchor(g, p);
    out.packets.push_back(p);
  }
  std::sort(out.packets.begin(), out.packets.end(),
            [](const BlockGraph::Packet& a, const BlockGraph::Packet& b) {
              return std::tie(a.src, a.etype, a.ax, a.dst, a.ay) <
                     std::tie(b.src, b.etype, b.ax, b.dst, b.ay);
            });
  out.basepoint = {0, 0};
  return out;
}

namespace detail {

// Transition lookup on a folded graph: (block, directed edge, source coset
// representative) -> packet index.
struct TransitionIndex {
  std::map<std::tuple<int, EdgeId, Elt>, int> table;

  static TransitionIndex build(const BlockGraph& b) {
    const GraphOfGroups& g = *b.gog;
    TransitionIndex t;
    for (size_t i = 0; i < b.packets.size(); ++i) {
      const BlockGraph::Packet& p = b.packets[i];
      EdgeId ebar = SerreGraph::inv(p.etype);
      t.table[{p.src, p.etype, g.coset_rep[p.etype][p.ax]}] = static_cast<int>(i);
      t.table[{p.dst, ebar, g.coset_rep[ebar][p.ay]}] = static_cast<int>(i);
    }
    return t;
  }

  // Transition of (block, x) across directed edge e, or nullopt.
  std::optional<BlockElement> step(const BlockGraph& b, BlockElement at, EdgeId e) const {
    const GraphOfGroups& g = *b.gog;
    auto it = table.find({at.block, e, g.coset_rep[e][at.x]});
    if (it == table.end()) return std::nullopt;
    const BlockGraph::Packet& p = b.packets[it->second];
    const FiniteGroup& ge = g.egroup(p.etype);
    if (SerreGraph::is_positive(e)) {
      Elt c = ge.mul(ge.inv(g.coset_twist[e][p.ax]), g.coset_twist[e][at.x]);
      return BlockElement{p.dst, g.vgroup(g.y.dst(e)).mul(p.ay, g.omega_of(p.etype).map[c])};
    }
    Elt c = ge.mul(ge.inv(g.coset_twist[e][p.ay]), g.coset_twist[e][at.x]);
    return BlockElement{p.src, g.vgroup(g.y.src(p.etype)).mul(p.ax, g.alpha_of(p.etype).map[c])};
  }

  std::optional<int> packet_at(const BlockGraph& b, BlockElement at, EdgeId e) const {
    const GraphOfGroups& g = *b.gog;
    auto it = table.find({at.block, e, g.coset_rep[e][at.x]});
    if (it == table.end()) return std::nullopt;
    return it->second;
  }
};

}  // namespace detail

// Traces w from the basepoint element; true iff every transition exists and
// the trace returns exactly to the basepoint element. On a folded graph this
// decides membership in the subgroup spanned by the wedge generators.
inline bool member(const BlockGraph& b, const GWord& word) {
  const GraphOfGroups& g = *b.gog;
  GWord w = normal_form(g, word);
  if (w.base != g.base_vertex || end_vertex(g, w) != g.base_vertex)
    throw BaseMismatch("membership queries take loops at the base vertex");
  detail::TransitionIndex idx = detail::TransitionIndex::build(b);
  BlockElement at = b.basepoint;
  at.x = b.block_group(at.block).mul(at.x, w.head);
  for (const GSyllable& s : w.tail) {
    auto next = idx.step(b, at, s.edge);
    if (!next) return false;
    at = *next;
    at.x = b.block_group(at.block).mul(at.x, s.coeff);
  }
  return at == b.basepoint;
}

// Core data of a folded subgroup graph.
struct CoreData {
  SerreGraph psi;                 // the core graph (empty when H is trivial)
  int rank = 0;                   // r(H)
  int reduced_rank = 0;           // max(r(H) - 1, 0)
  bool trivial = false;           // projection was a tree
  std::vector<int> block_of;      // psi vertex -> block id
  std::vector<int> packet_of;     // psi positive edge index -> packet id
  std::vector<int> degrees;       // psi vertex degrees

  int psi_vertices() const { return psi.num_vertices(); }
  int psi_positive_edges() const { return psi.num_positive_edges(); }
};

inline CoreData core_of(const BlockGraph& b) {
  SerreGraph pg = b.underlying();
  CoreData data;
  if (fundamental_rank(pg) == 0) {
    data.trivial = true;
    return data;
  }
  CoreResult c = core(pg);
  data.psi = c.core;
  data.rank = fundamental_rank(c.core);
  data.reduced_rank = c.core.num_positive_edges() - c.core.num_vertices();
  data.block_of = c.vertex_map;
  for (size_t i = 0; i < c.edge_map.size(); i += 2) data.packet_of.push_back(c.edge_map[i] / 2);
  for (VertexId v = 0; v < c.core.num_vertices(); ++v) data.degrees.push_back(c.core.degree(v));
  return data;
}

// Free generators of the subgroup: one loop per positive packet outside a
// breadth-first spanning tree, read off through the torsor decorations.
inline std::vector<GWord> free_generators(const BlockGraph& b) {
  const GraphOfGroups& g = *b.gog;
  const int n = static_cast<int>(b.blocks.size());
  std::vector<GWord> path(n);        // path word reaching elt_of[block]
  std::vector<Elt> elt_of(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<bool> in_tree(b.packets.size(), false);

  path[b.basepoint.block] = identity_word(g.base_vertex);
  elt_of[b.basepoint.block] = b.basepoint.x;
  seen[b.basepoint.block] = true;
  std::vector<int> queue{b.basepoint.block};
  auto extend = [&](const GWord& w, Elt move, EdgeId e) {
    GWord out = w;
    VertexId at = end_vertex(g, out);
    if (out.tail.empty())
      out.head = g.vgroup(at).mul(out.head, move);
    else
      out.tail.back().coeff = g.vgroup(at).mul(out.tail.back().coeff, move);
    out.tail.push_back({e, 0});
    return out;
  };
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int blk = queue[qi];
    for (size_t i = 0; i < b.packets.size(); ++i) {
      const BlockGraph::Packet& p = b.packets[i];
      if (p.src == blk && !seen[p.dst]) {
        const FiniteGroup& gs = g.vgroup(g.y.src(p.etype));
        path[p.dst] = extend(path[blk], gs.mul(gs.inv(elt_of[blk]), p.ax), p.etype);
        elt_of[p.dst] = p.ay;
        seen[p.dst] = true;
        in_tree[i] = true;
        queue.push_back(p.dst);
      } else if (p.dst == blk && !seen[p.src]) {
        const FiniteGroup& gd = g.vgroup(g.y.dst(p.etype));
        path[p.src] =
            extend(path[blk], gd.mul(gd.inv(elt_of[blk]), p.ay), SerreGraph::inv(p.etype));
        elt_of[p.src] = p.ax;
        seen[p.src] = true;
        in_tree[i] = true;
        queue.push_back(p.src);
      }
    }
  }

  std::vector<GWord> gens;
  for (size_t i = 0; i < b.packets.size(); ++i) {
    if (in_tree[i]) continue;
    const BlockGraph::Packet& p = b.packets[i];
    const FiniteGroup& gs = g.vgroup(g.y.src(p.etype));
    GWord forward = extend(path[p.src], gs.mul(gs.inv(elt_of[p.src]), p.ax), p.etype);
    // forward reaches element (p.dst, p.ay); return along the tree path.
    const FiniteGroup& gd = g.vgroup(g.y.dst(p.etype));
    GWord back = path[p.dst];
    VertexId at = end_vertex(g, back);
    if (back.tail.empty())
      back.head = g.vgroup(at).mul(back.head, gd.mul(gd.inv(elt_of[p.dst]), p.ay));
    else
      back.tail.back().coeff =
          g.vgroup(at).mul(back.tail.back().coeff, gd.mul(gd.inv(elt_of[p.dst]), p.ay));
    gens.push_back(normal_form(g, concatenate(g, forward, invert(g, back))));
  }
  return gens;
}

// Forced isomorphism check for folded, based block graphs: the element
// correspondence propagates deterministically from the basepoints, so either
// it closes up or the graphs differ.
inline bool blockgraphs_isomorphic(const BlockGraph& a, const BlockGraph& b) {
  if (a.gog != b.gog) throw AmbientMismatch("block graphs over different graphs of groups");
  if (a.blocks.size() != b.blocks.size() || a.packets.size() != b.packets.size()) return false;
  detail::TransitionIndex ib = detail::TransitionIndex::build(b);
  const int n = static_cast<int>(a.blocks.size());
  std::vector<int> image(n, -1);
  std::vector<Elt> mu(n, 0);  // (A, x) corresponds to (image[A], mu[A] * x)
  std::vector<bool> used(n, false);

  if (a.blocks[a.basepoint.block].type != b.blocks[b.basepoint.block].type) return false;
  image[a.basepoint.block] = b.basepoint.block;
  const FiniteGroup& g0 = a.block_group(a.basepoint.block);
  mu[a.basepoint.block] = g0.mul(b.basepoint.x, g0.inv(a.basepoint.x));
  used[b.basepoint.block] = true;
  std::vector<int> queue{a.basepoint.block};
  std::set<int> matched_b_packets;

  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int blk = queue[qi];
    for (size_t i = 0; i < a.packets.size(); ++i) {
      const BlockGraph::Packet& p = a.packets[i];
      for (bool forward : {true, false}) {
        if ((forward ? p.src : p.dst) != blk) continue;
        EdgeId e = forward ? p.etype : SerreGraph::inv(p.etype);
        BlockElement from_a{blk, forward ? p.ax : p.ay};
        BlockElement to_a = forward ? BlockElement{p.dst, p.ay} : BlockElement{p.src, p.ax};
        const FiniteGroup& gs = a.block_group(blk);
        BlockElement from_b{image[blk], gs.mul(mu[blk], from_a.x)};
        auto to_b = ib.step(b, from_b, e);
        auto pb = ib.packet_at(b, from_b, e);
        if (!to_b || !pb) return false;
        matched_b_packets.insert(*pb);
        int ca = to_a.block;
        if (a.blocks[ca].type != b.blocks[to_b->block].type) return false;
        const FiniteGroup& gc = a.block_group(ca);
        Elt want_mu = gc.mul(to_b->x, gc.inv(to_a.x));
        if (image[ca] < 0) {
          if (used[to_b->block]) return false;
          image[ca] = to_b->block;
          mu[ca] = want_mu;
          used[to_b->block] = true;
          queue.push_back(ca);
        } else if (image[ca] != to_b->block || mu[ca] != want_mu) {
          return false;
        }
      }
    }
  }
  if (static_cast<int>(queue.size()) != n) return false;  // a not connected onto b
  return matched_b_packets.size() == b.packets.size();
}

inline void write_dot(std::ostream& os, const BlockGraph& b) {
  SerreGraph pg = b.underlying();
  write_dot(
      os, pg,
      [&](VertexId v) {
        return "B" + std::to_string(v) + ":v" + std::to_string(b.blocks[v].type);
      },
      [&](EdgeId e) {
        const BlockGraph::Packet& p = b.packets[e / 2];
        return "e" + std::to_string(p.etype / 2) + " (" + std::to_string(p.ax) + "," +
               std::to_string(p.ay) + ")";
      });
}

}  // namespace vfkit
