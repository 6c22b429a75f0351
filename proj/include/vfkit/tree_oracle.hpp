#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "vfkit/graph_of_groups.hpp"
#include "vfkit/serre_graph.hpp"

namespace vfkit {

inline constexpr int kMaxBallRadius = 12;
inline constexpr int kMaxBallVertices = 1'000'000;
inline constexpr int kMaxElementSet = 100'000;

// The Bass-Serre tree out to a fixed radius around the base vertex. Vertices
// are coset classes g G_v, addressed by their pinned reduced path words; each
// non-root node stores the (transversal coefficient, edge) step from its
// parent, which doubles as the tree edge above it.
struct TreeBall {
  struct Node {
    int parent = -1;
    Elt t = 0;       // transversal coefficient read before the edge
    EdgeId e = -1;   // directed edge type from the parent downwards
    VertexId vtype = 0;
    int depth = 0;
    int first_child = 0;  // children occupy a contiguous id range
    int num_children = 0;
  };

  const GraphOfGroups* gog = nullptr;
  int radius = 0;
  std::vector<Node> nodes;  // node 0 = base vertex
  std::unordered_map<std::uint64_t, int> children;

  static std::uint64_t child_key(int parent, EdgeId e, Elt t) {
    return (static_cast<std::uint64_t>(parent) << 16) |
           (static_cast<std::uint64_t>(e) << 6) | static_cast<std::uint64_t>(t);
  }

  int child_of(int parent, EdgeId e, Elt t) const {
    auto it = children.find(child_key(parent, e, t));
    return it == children.end() ? -1 : it->second;
  }

  int vertex_count() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return vertex_count() - 1; }  // tree edges, undirected

  // Path word from the base to this node, final coefficient identity.
  GWord node_word(int id) const {
    std::vector<std::pair<Elt, EdgeId>> steps;
    for (int at = id; at != 0; at = nodes[at].parent) steps.push_back({nodes[at].t, nodes[at].e});
    std::reverse(steps.begin(), steps.end());
    GWord w = identity_word(gog->base_vertex);
    for (size_t i = 0; i < steps.size(); ++i) {
      if (i == 0)
        w.head = steps[i].first;
      else
        w.tail.back().coeff = steps[i].first;
      w.tail.push_back({steps[i].second, 0});
    }
    return w;
  }

  // Node reached by a pinned normal-form path word plus the leftover final
  // coefficient, or node -1 if the word leaves the ball.
  std::pair<int, Elt> descend_with_twist(const GWord& w) const {
    int at = 0;
    for (size_t i = 0; i < w.tail.size(); ++i) {
      Elt t = (i == 0) ? w.head : w.tail[i - 1].coeff;
      at = child_of(at, w.tail[i].edge, t);
      if (at < 0) return {-1, 0};
    }
    Elt last = w.tail.empty() ? w.head : w.tail.back().coeff;
    return {at, last};
  }

  std::pair<int, Elt> translate_with_twist(const GWord& h, int node) const {
    GWord moved = normal_form(*gog, concatenate(*gog, h, node_word(node)));
    return descend_with_twist(moved);
  }

  // Image of a ball vertex under the left action of a loop word, or -1 when
  // the image lies outside the ball.
  int translate(const GWord& h, int node) const { return translate_with_twist(h, node).first; }

  // Images of every ball vertex under one loop word. A depth-first walk
  // maintains the normal form of h * (path word) as a stack, so each step is
  // a pinch or a push costing O(1); images deeper than the radius are -1
  // until the word pinches back inside.
  void translate_all(const GWord& h_nf, std::vector<int>& image) const {
    const GraphOfGroups& g = *gog;
    image.assign(vertex_count(), -1);
    std::vector<std::pair<Elt, EdgeId>> word;  // pinned (coefficient, edge) pairs
    std::vector<int> ids{0};                   // ids[d] = ball node of prefix d

    auto push_pair = [&](Elt rep, EdgeId e) {
      word.push_back({rep, e});
      if (static_cast<int>(word.size()) <= radius)
        ids.push_back(ids.back() < 0 ? -1 : child_of(ids.back(), e, rep));
    };
    auto pop_pair = [&]() {
      word.pop_back();
      if (ids.size() > word.size() + 1) ids.pop_back();
    };

    for (size_t i = 0; i < h_nf.tail.size(); ++i)
      push_pair(i == 0 ? h_nf.head : h_nf.tail[i - 1].coeff, h_nf.tail[i].edge);
    Elt twist0 = h_nf.tail.empty() ? h_nf.head : h_nf.tail.back().coeff;

    std::function<void(int, Elt)> dfs = [&](int k, Elt twist) {
      image[k] = static_cast<int>(word.size()) <= radius ? ids[word.size()] : -1;
      int end = nodes[k].first_child + nodes[k].num_children;
      for (int c = nodes[k].first_child; c < end; ++c) {
        EdgeId e = nodes[c].e;
        Elt gcoeff = g.vgroup(g.y.src(e)).mul(twist, nodes[c].t);
        Elt rep = g.coset_rep[e][gcoeff];
        Elt cc = g.coset_twist[e][gcoeff];
        if (!word.empty() && e == SerreGraph::inv(word.back().second) && rep == 0) {
          auto popped = word.back();
          pop_pair();
          Elt next = g.vgroup(g.y.src(popped.second))
                         .mul(popped.first, g.alpha_of(popped.second).map[cc]);
          dfs(c, next);
          push_pair(popped.first, popped.second);
        } else {
          push_pair(rep, e);
          dfs(c, g.omega_of(e).map[cc]);
          pop_pair();
        }
      }
    };
    dfs(0, twist0);
  }
};

inline TreeBall build_ball(const GraphOfGroups& g, int radius,
                           int max_vertices = kMaxBallVertices) {
  if (radius < 0 || radius > kMaxBallRadius)
    throw CapExceeded("ball radius " + std::to_string(radius) + " exceeds cap " +
                      std::to_string(kMaxBallRadius));
  TreeBall ball;
  ball.gog = &g;
  ball.radius = radius;
  ball.nodes.push_back({-1, 0, -1, g.base_vertex, 0, 0, 0});
  for (size_t qi = 0; qi < ball.nodes.size(); ++qi) {
    TreeBall::Node node = ball.nodes[qi];
    ball.nodes[qi].first_child = static_cast<int>(ball.nodes.size());
    if (node.depth == radius) continue;
    for (EdgeId e = 0; e < g.y.num_edges(); ++e) {
      if (g.y.src(e) != node.vtype) continue;
      for (Elt t : g.transversal[e]) {
        // (t, e) with t the identity representative retraces the parent edge.
        if (node.parent >= 0 && e == SerreGraph::inv(node.e) && t == 0) continue;
        if (static_cast<int>(ball.nodes.size()) >= max_vertices)
          throw CapExceeded("ball exceeds " + std::to_string(max_vertices) + " vertices");
        int id = static_cast<int>(ball.nodes.size());
        ball.nodes.push_back({static_cast<int>(qi), t, e, g.y.dst(e), node.depth + 1, 0, 0});
        ball.children[TreeBall::child_key(static_cast<int>(qi), e, t)] = id;
        ++ball.nodes[qi].num_children;
      }
    }
  }
  return ball;
}

// Products of at most `length` generators and inverses, deduplicated by
// normal form. Closed under inversion and contains the identity.
struct ElementSet {
  std::vector<GWord> elements;
  std::vector<GWord> gens;  // normal forms of the generating loops
  int length = 0;
  int gen_max_len = 0;
  std::set<std::vector<int>> keys;

  static std::vector<int> key_of(const GWord& w) {
    std::vector<int> k{w.base, w.head};
    for (const GSyllable& s : w.tail) {
      k.push_back(s.edge);
      k.push_back(s.coeff);
    }
    return k;
  }

  bool contains_nf(const GWord& nf) const { return keys.count(key_of(nf)) != 0; }
};

inline ElementSet enumerate_subgroup(const GraphOfGroups& g, const std::vector<GWord>& gens,
                                     int length, int cap = kMaxElementSet) {
  ElementSet set;
  set.length = length;
  std::vector<GWord> alphabet;
  for (const GWord& w : gens) {
    GWord n = normal_form(g, w);
    set.gens.push_back(n);
    set.gen_max_len = std::max(set.gen_max_len, n.length());
    alphabet.push_back(n);
    alphabet.push_back(normal_form(g, invert(g, n)));
  }
  GWord id = identity_word(g.base_vertex);
  set.elements.push_back(id);
  set.keys.insert(ElementSet::key_of(id));
  std::vector<GWord> frontier{id};
  for (int step = 0; step < length; ++step) {
    std::vector<GWord> next;
    for (const GWord& w : frontier)
      for (const GWord& a : alphabet) {
        GWord p = multiply(g, w, a);
        if (set.keys.insert(ElementSet::key_of(p)).second) {
          if (static_cast<int>(set.elements.size()) >= cap)
            throw CapExceeded("element set exceeds " + std::to_string(cap) + " elements");
          set.elements.push_back(p);
          next.push_back(p);
        }
      }
    frontier.swap(next);
  }
  return set;
}

// One-sided membership oracle: true iff w is a product of at most `length`
// generators. False only means "not found at this depth".
inline bool brute_member(const GraphOfGroups& g, const std::vector<GWord>& gens, const GWord& w,
                         int length) {
  ElementSet set = enumerate_subgroup(g, gens, length);
  return set.contains_nf(normal_form(g, w));
}

struct QuotientResult {
  SerreGraph graph;             // quotient restricted to the inner ball
  std::vector<int> vtype;       // per quotient vertex: vertex type in Y
  std::vector<int> edge_type;   // per directed quotient edge: directed edge of Y
  VertexId base_class = -1;     // -1 when the inner region is empty
  int inner_radius = 0;
  bool stabilized = false;
  bool fixed_vertex_found = false;  // a nonidentity element fixed a vertex
  bool edge_inversion_found = false;
  int fixed_vertex_node = -1;
  GWord fixed_by;
  std::vector<int> class_of_node;  // ball node -> quotient vertex (or -1)
};

namespace detail {

struct BallQuotient {
  std::vector<int> vparent;  // union-find over ball nodes
  std::vector<int> eparent;  // union-find over directed ball edges (2k, 2k+1)
  bool fixed_found = false;
  int fixed_node = -1;
  GWord fixed_by;
  bool inversion_found = false;

  int vfind(int v) { return vparent[v] == v ? v : vparent[v] = vfind(vparent[v]); }
  int efind(int e) { return eparent[e] == e ? e : eparent[e] = efind(eparent[e]); }
  void vunion(int a, int b) { vparent[vfind(a)] = vfind(b); }
  void eunion(int a, int b) { eparent[efind(a)] = efind(b); }
};

inline BallQuotient quotient_by(const TreeBall& ball, const ElementSet& hs) {
  const int n = ball.vertex_count();
  BallQuotient q;
  q.vparent.resize(n);
  q.eparent.resize(2 * n);
  std::iota(q.vparent.begin(), q.vparent.end(), 0);
  std::iota(q.eparent.begin(), q.eparent.end(), 0);

  // Directed edge above node k: 2k = downward (parent -> k), 2k+1 = upward.
  std::vector<int> image;
  for (const GWord& h : hs.elements) {
    if (h.tail.empty() && h.head == 0) continue;
    if (h.length() > 2 * ball.radius) continue;  // cannot map any ball vertex inside
    ball.translate_all(h, image);
    for (int u = 0; u < n; ++u) {
      if (image[u] < 0) continue;
      if (image[u] == u && !q.fixed_found) {
        q.fixed_found = true;
        q.fixed_node = u;
        q.fixed_by = h;
      }
      q.vunion(u, image[u]);
    }
    for (int k = 1; k < n; ++k) {
      int p = ball.nodes[k].parent;
      if (image[k] < 0 || image[p] < 0) continue;
      int a = image[p], b = image[k];
      int down, up;
      if (ball.nodes[b].depth == ball.nodes[a].depth + 1 && ball.nodes[b].parent == a) {
        down = 2 * b;
        up = down ^ 1;
      } else if (ball.nodes[a].depth == ball.nodes[b].depth + 1 && ball.nodes[a].parent == b) {
        up = 2 * a;
        down = up ^ 1;
      } else {
        continue;  // translation left partial data at the ball boundary
      }
      q.eunion(2 * k, down);
      q.eunion(2 * k + 1, up);
    }
  }
  for (int k = 1; k < n; ++k)
    if (q.efind(2 * k) == q.efind(2 * k + 1)) q.inversion_found = true;
  return q;
}

inline QuotientResult quotient_graph(const TreeBall& ball, const ElementSet& hs, int cut) {
  BallQuotient q = quotient_by(ball, hs);
  const int n = ball.vertex_count();
  QuotientResult out;
  out.inner_radius = cut;
  out.fixed_vertex_found = q.fixed_found;
  out.fixed_vertex_node = q.fixed_node;
  out.fixed_by = q.fixed_by;
  out.edge_inversion_found = q.inversion_found;
  out.class_of_node.assign(n, -1);
  if (cut < 0) return out;

  std::vector<int> min_depth(n, kMaxBallRadius + 1);
  for (int u = 0; u < n; ++u) {
    int root = q.vfind(u);
    min_depth[root] = std::min(min_depth[root], ball.nodes[u].depth);
  }
  std::map<int, int> vid;  // class root -> quotient vertex, in root id order
  for (int u = 0; u < n; ++u) {
    int root = q.vfind(u);
    if (min_depth[root] <= cut && !vid.count(root)) {
      int id = static_cast<int>(vid.size());
      vid[root] = id;
      out.vtype.push_back(ball.nodes[u].vtype);
    }
  }
  for (int u = 0; u < n; ++u) {
    auto it = vid.find(q.vfind(u));
    out.class_of_node[u] = it == vid.end() ? -1 : it->second;
  }
  out.graph = SerreGraph(static_cast<int>(vid.size()));
  std::set<int> emitted;
  for (int k = 1; k < n; ++k) {
    if (std::max(ball.nodes[k].depth, ball.nodes[ball.nodes[k].parent].depth) > cut) continue;
    int down = q.efind(2 * k);
    int up = q.efind(2 * k + 1);
    if (emitted.count(down) || emitted.count(up)) continue;
    emitted.insert(down);
    emitted.insert(up);
    int p = ball.nodes[k].parent;
    out.graph.add_edge_pair(out.class_of_node[p], out.class_of_node[k]);
    out.edge_type.push_back(ball.nodes[k].e);
    out.edge_type.push_back(SerreGraph::inv(ball.nodes[k].e));
  }
  out.base_class = out.class_of_node[0];
  return out;
}

}  // namespace detail

// Quotient of the ball by the partial subgroup hs, restricted to the inner
// ball of radius R - (max generator length). The stabilization flag reports
// whether rebuilding with R+2 and L+2 leaves the inner quotient unchanged up
// to based isomorphism; only then is the result treated as T/H near the base.
inline QuotientResult quotient_ball(const TreeBall& ball, const ElementSet& hs,
                                    int max_vertices = kMaxBallVertices,
                                    int max_elements = kMaxElementSet) {
  const GraphOfGroups& g = *ball.gog;
  int cut = ball.radius - hs.gen_max_len;
  QuotientResult base = detail::quotient_graph(ball, hs, cut);
  base.stabilized = false;
  if (cut < 0 || base.base_class < 0) return base;
  TreeBall bigger = build_ball(g, ball.radius + 2, max_vertices);
  ElementSet more = enumerate_subgroup(g, hs.gens, hs.length + 2, max_elements);
  QuotientResult again = detail::quotient_graph(bigger, more, cut);
  if (again.base_class < 0) return base;
  base.stabilized =
      isomorphic_impl(base.graph, again.graph, &base.vtype, &again.vtype, &base.edge_type,
                      &again.edge_type, base.base_class, again.base_class);
  base.fixed_vertex_found = base.fixed_vertex_found || again.fixed_vertex_found;
  base.edge_inversion_found = base.edge_inversion_found || again.edge_inversion_found;
  if (base.fixed_vertex_node < 0 && again.fixed_vertex_node >= 0) {
    base.fixed_vertex_node = again.fixed_vertex_node;
    base.fixed_by = again.fixed_by;
  }
  return base;
}

// Max over ball edges x of #{ s in Stab(x) : s in hs_H * hs_K }, a certified
// lower bound for m = max |Stab_G(x) cap HK| (products are truncated at the
// enumeration length).
inline int stab_count_lower(const TreeBall& ball, const ElementSet& hs_h,
                            const ElementSet& hs_k) {
  const GraphOfGroups& g = *ball.gog;
  std::map<std::vector<int>, bool> memo;
  auto in_product = [&](const GWord& s) {
    auto key = ElementSet::key_of(s);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool found = false;
    for (const GWord& h : hs_h.elements) {
      GWord rest = multiply(g, normal_form(g, invert(g, h)), s);
      if (hs_k.contains_nf(rest)) {
        found = true;
        break;
      }
    }
    memo[key] = found;
    return found;
  };
  int best = 1;  // the identity lies in every stabilizer and in HK
  for (int k = 1; k < ball.vertex_count(); ++k) {
    EdgeId e = ball.nodes[k].e;
    const FiniteGroup& ge = g.egroup(e);
    if (ge.order == 1) continue;
    int p = ball.nodes[k].parent;
    GWord stem = ball.node_word(p);
    if (stem.tail.empty())
      stem.head = ball.nodes[k].t;
    else
      stem.tail.back().coeff = ball.nodes[k].t;
    int count = 1;
    for (Elt c = 1; c < ge.order; ++c) {
      GWord mid = identity_word(g.y.src(e));
      mid.head = g.alpha_of(e).map[c];
      GWord s = normal_form(
          g, concatenate(g, concatenate(g, stem, mid), invert(g, stem)));
      if (in_product(s)) ++count;
    }
    best = std::max(best, count);
  }
  return best;
}

}  // namespace vfkit
