#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "fixtures.hpp"
#include "vfkit/subgroup_folding.hpp"
#include "vfkit/tree_oracle.hpp"

using namespace vfkit;
using namespace fixtures;

namespace {

// All loop words at the base with at most max_edges edge syllables.
std::vector<GWord> all_loops(const GraphOfGroups& g, int max_edges) {
  std::vector<GWord> out;
  std::vector<GWord> frontier;
  for (Elt h = 0; h < g.vgroup(g.base_vertex).order; ++h)
    frontier.push_back(GWord{g.base_vertex, h, {}});
  for (int len = 0; len <= max_edges; ++len) {
    std::vector<GWord> next;
    for (const GWord& w : frontier) {
      if (end_vertex(g, w) == g.base_vertex) out.push_back(w);
      if (len == max_edges) continue;
      VertexId at = end_vertex(g, w);
      for (EdgeId e = 0; e < g.y.num_edges(); ++e) {
        if (g.y.src(e) != at) continue;
        for (Elt c = 0; c < g.vgroup(g.y.dst(e)).order; ++c) {
          GWord w2 = w;
          w2.tail.push_back({e, c});
          next.push_back(w2);
        }
      }
    }
    frontier.swap(next);
  }
  return out;
}

std::vector<GWord> z6_kernel_gens(const GraphOfGroups& g) {
  auto A = SPresLetter::vertex(0, 1);
  auto B = SPresLetter::vertex(1, 1);
  auto B2 = SPresLetter::vertex(1, 2);
  return {from_spres({A, B, A, B2}, g), from_spres({A, B2, A, B}, g)};
}

}  // namespace

TEST_CASE("ball construction counts") {
  SECTION("radius zero is one vertex") {
    GraphOfGroups g = rose(2);
    CHECK(build_ball(g, 0).vertex_count() == 1);
  }
  SECTION("rose with two loops, radius 1: center plus 4 neighbors") {
    GraphOfGroups g = rose(2);
    TreeBall b = build_ball(g, 1);
    CHECK(b.vertex_count() == 5);
    CHECK(build_ball(g, 2).vertex_count() == 17);
  }
  SECTION("Z/2 * Z/3 from the Z/2 vertex, radius 1: two neighbors") {
    GraphOfGroups g = z2_z3();
    CHECK(build_ball(g, 1).vertex_count() == 3);
  }
  SECTION("caps") {
    GraphOfGroups g = rose(2);
    CHECK_THROWS_AS(build_ball(g, 13), CapExceeded);
    CHECK_THROWS_AS(build_ball(g, 8, 100), CapExceeded);
  }
}

TEST_CASE("interior degrees match the Bass-Serre formula") {
  for (const GraphOfGroups& g : {z2_z3(), z4_z6_over_z2(), hnn_z4_over_z2()}) {
    TreeBall ball = build_ball(g, 4);
    std::vector<int> degree(ball.vertex_count(), 0);
    for (int k = 1; k < ball.vertex_count(); ++k) {
      ++degree[k];
      ++degree[ball.nodes[k].parent];
    }
    for (int u = 0; u < ball.vertex_count(); ++u) {
      if (ball.nodes[u].depth >= ball.radius) continue;  // boundary is truncated
      int expect = 0;
      for (EdgeId e = 0; e < g.y.num_edges(); ++e)
        if (g.y.src(e) == ball.nodes[u].vtype)
          expect += g.vgroup(g.y.src(e)).order / g.egroup(e).order;
      CHECK(degree[u] == expect);
    }
  }
}

TEST_CASE("translation acts by tree automorphisms") {
  GraphOfGroups g = z2_z3();
  TreeBall ball = build_ball(g, 5);
  for (int i = 0; i < 40; ++i) {
    GWord h = random_element(g, 3, 4000 + i);
    for (int u : {0, 1, 2}) {
      int hu = ball.translate(h, u);
      if (hu < 0) continue;
      CHECK(ball.nodes[hu].vtype == ball.nodes[u].vtype);
      // h^-1 h u = u whenever the intermediate image stays inside.
      int back = ball.translate(normal_form(g, invert(g, h)), hu);
      if (back >= 0) CHECK(back == u);
    }
  }
}

TEST_CASE("translate_all matches single translations") {
  for (const GraphOfGroups& g : {rose(2), z2_z3(), z4_z6_over_z2(), hnn_z4_over_z2()}) {
    TreeBall ball = build_ball(g, 4);
    std::vector<int> image;
    for (int i = 0; i < 25; ++i) {
      GWord h = random_element(g, 5, 8800 + i);
      ball.translate_all(normal_form(g, h), image);
      for (int u = 0; u < ball.vertex_count(); ++u)
        CHECK(image[u] == ball.translate(h, u));
    }
  }
}

TEST_CASE("equality of words agrees with the tree action on faithful fixtures") {
  // Faithful means trivial edge groups; then a nontrivial element moves some
  // vertex within one step of a base-adjacent vertex.
  for (const GraphOfGroups& g : {rose(2), z2_z3(), z2_z2(), hnn_z2_trivial()}) {
    TreeBall ball = build_ball(g, 6);
    std::vector<int> domain;
    for (int u = 0; u < ball.vertex_count(); ++u)
      if (ball.nodes[u].depth <= 2) domain.push_back(u);
    std::vector<GWord> words = all_loops(g, 3);
    if (words.size() > 80) words.resize(80);
    for (size_t i = 0; i < words.size(); ++i)
      for (size_t j = i; j < words.size(); ++j) {
        std::vector<int> va, vb;
        for (int u : domain) va.push_back(ball.translate(words[i], u));
        for (int u : domain) vb.push_back(ball.translate(words[j], u));
        CHECK(equal(g, words[i], words[j]) == (va == vb));
      }
  }
}

TEST_CASE("enumerate_subgroup") {
  GraphOfGroups g = rose(2);
  SECTION("length zero is the identity alone") {
    ElementSet s = enumerate_subgroup(g, {rose_word(g, {0})}, 0);
    CHECK(s.elements.size() == 1);
  }
  SECTION("powers of x up to length 3") {
    ElementSet s = enumerate_subgroup(g, {rose_word(g, {0})}, 3);
    CHECK(s.elements.size() == 7);  // 1, x^{+-1,+-2,+-3}
  }
  SECTION("free rank-2 growth of the Z/6 kernel generators") {
    GraphOfGroups h = z2_z3();
    ElementSet s = enumerate_subgroup(h, z6_kernel_gens(h), 2);
    // A free basis {u, v}: 1, four single letters, twelve reduced pairs.
    CHECK(s.elements.size() == 17);
  }
  SECTION("closed under inverses, contains identity") {
    ElementSet s = enumerate_subgroup(g, {rose_word(g, {0, 1}), rose_word(g, {1, 1})}, 3);
    CHECK(s.contains_nf(identity_word(0)));
    for (const GWord& w : s.elements)
      CHECK(s.contains_nf(normal_form(g, invert(g, w))));
  }
  SECTION("cap") {
    CHECK_THROWS_AS(enumerate_subgroup(g, {rose_word(g, {0}), rose_word(g, {1})}, 9, 100),
                    CapExceeded);
  }
}

TEST_CASE("brute membership") {
  GraphOfGroups g = rose(2);
  SECTION("identity and generators") {
    CHECK(brute_member(g, {rose_word(g, {0})}, identity_word(0), 0));
    CHECK(brute_member(g, {rose_word(g, {0})}, rose_word(g, {0}), 1));
  }
  SECTION("x is not found in <x^2> at any tested depth") {
    for (int len : {1, 2, 4, 6})
      CHECK_FALSE(brute_member(g, {rose_word(g, {0, 0})}, rose_word(g, {0}), len));
    BlockGraph b = fold(wedge(g, {rose_word(g, {0, 0})}));
    CHECK_FALSE(member(b, rose_word(g, {0})));
  }
}

TEST_CASE("quotient by the trivial subgroup returns the inner ball") {
  GraphOfGroups g = rose(2);
  TreeBall ball = build_ball(g, 3);
  ElementSet hs = enumerate_subgroup(g, {}, 2);
  QuotientResult q = quotient_ball(ball, hs);
  CHECK(q.inner_radius == 3);
  CHECK(q.graph.num_vertices() == ball.vertex_count());
  CHECK(fundamental_rank(q.graph) == 0);  // still a tree
  CHECK(q.stabilized);                    // T itself never changes near the base
}

TEST_CASE("quotient by <x> in F2 stabilizes on a single loop core") {
  GraphOfGroups g = rose(2);
  TreeBall ball = build_ball(g, 5);
  ElementSet hs = enumerate_subgroup(g, {rose_word(g, {0})}, 5);
  QuotientResult q = quotient_ball(ball, hs);
  REQUIRE(q.base_class >= 0);
  CHECK(q.stabilized);
  CHECK_FALSE(q.fixed_vertex_found);
  CoreResult c = core(q.graph);
  CHECK(c.core.num_vertices() == 1);
  CHECK(c.core.num_positive_edges() == 1);
}

TEST_CASE("stabilized quotients agree with folding") {
  struct Case {
    GraphOfGroups g;
    std::vector<GWord> gens;
    int radius;
    int length;
  };
  std::vector<Case> cases;
  {
    GraphOfGroups g = rose(2);
    auto gens = std::vector<GWord>{rose_word(g, {0, 0}), rose_word(g, {1, 1}),
                                   rose_word(g, {0, 1, 0, 1})};
    cases.push_back({std::move(g), gens, 6, 3});
  }
  {
    GraphOfGroups g = z2_z3();
    auto gens = z6_kernel_gens(g);
    cases.push_back({std::move(g), gens, 6, 3});
  }
  {
    // Short pairs in this amalgam tend to trap torsion (a^2 = b^3 is
    // central in both factors); this pair folds freely to rank 2.
    GraphOfGroups g = z4_z6_over_z2();
    auto gens = std::vector<GWord>{loop(g, 0, {{0, 2}, {1, 1}, {0, 2}, {1, 1}}),
                                   loop(g, 0, {{0, 1}, {1, 1}, {0, 1}, {1, 1}})};
    cases.push_back({std::move(g), gens, 7, 3});
  }
  for (const Case& c : cases) {
    TreeBall ball = build_ball(c.g, c.radius);
    ElementSet hs = enumerate_subgroup(c.g, c.gens, c.length);
    QuotientResult q = quotient_ball(ball, hs);
    REQUIRE(q.stabilized);
    BlockGraph folded = fold(wedge(c.g, c.gens));
    CoreData psi = core_of(folded);
    REQUIRE_FALSE(psi.trivial);
    CoreResult oracle_core = core(q.graph);
    CHECK(fundamental_rank(oracle_core.core) == psi.rank);
    CHECK(graphs_isomorphic(oracle_core.core, psi.psi));
  }
}

TEST_CASE("membership agreement between folding and enumeration") {
  GraphOfGroups g = z2_z3();
  auto gens = z6_kernel_gens(g);
  BlockGraph folded = fold(wedge(g, gens));
  for (const GWord& w : all_loops(g, 4)) {
    bool via_fold = member(folded, w);
    bool via_brute = brute_member(g, gens, w, 4);
    CHECK(via_fold == via_brute);
  }
}

TEST_CASE("fixed vertices witness non-free actions") {
  GraphOfGroups g = z2_z3();
  TreeBall ball = build_ball(g, 4);
  SECTION("the vertex-group subgroup <a> fixes the base vertex") {
    ElementSet hs = enumerate_subgroup(g, {amalgam_a(g, 1)}, 2);
    QuotientResult q = quotient_ball(ball, hs);
    CHECK(q.fixed_vertex_found);
    CHECK(q.fixed_vertex_node == 0);
  }
  SECTION("torsion-free subgroups fix nothing") {
    ElementSet hs = enumerate_subgroup(g, z6_kernel_gens(g), 3);
    QuotientResult q = quotient_ball(ball, hs);
    CHECK_FALSE(q.fixed_vertex_found);
  }
}

TEST_CASE("quotient projection is a surjective type-preserving map") {
  GraphOfGroups g = z2_z3();
  TreeBall ball = build_ball(g, 5);
  ElementSet hs = enumerate_subgroup(g, z6_kernel_gens(g), 3);
  QuotientResult q = quotient_ball(ball, hs);
  REQUIRE(q.base_class >= 0);
  std::set<int> hit;
  for (int u = 0; u < ball.vertex_count(); ++u) {
    int c = q.class_of_node[u];
    if (c < 0) continue;
    hit.insert(c);
    CHECK(q.vtype[c] == ball.nodes[u].vtype);
  }
  CHECK(static_cast<int>(hit.size()) == q.graph.num_vertices());
}

TEST_CASE("stab_count_lower") {
  SECTION("trivial edge groups give 1") {
    GraphOfGroups g = rose(2);
    TreeBall ball = build_ball(g, 3);
    ElementSet h = enumerate_subgroup(g, {rose_word(g, {0})}, 2);
    CHECK(stab_count_lower(ball, h, h) == 1);
  }
  SECTION("bounded by the largest edge group") {
    GraphOfGroups g = z4_z6_over_z2();
    TreeBall ball = build_ball(g, 3);
    GWord w1 = loop(g, 0, {{0, 1}, {1, 1}});
    GWord w2 = loop(g, 0, {{0, 1}, {1, 2}});
    ElementSet h = enumerate_subgroup(g, {w1}, 3);
    ElementSet k = enumerate_subgroup(g, {w2}, 3);
    int m_low = stab_count_lower(ball, h, k);
    CHECK(m_low >= 1);
    CHECK(m_low <= g.max_edge_group_order());
  }
}
