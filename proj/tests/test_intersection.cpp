#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "vfkit/intersection.hpp"
#include "vfkit/tree_oracle.hpp"

using namespace vfkit;
using namespace fixtures;

namespace {

std::vector<GWord> z6_kernel_gens(const GraphOfGroups& g) {
  auto A = SPresLetter::vertex(0, 1);
  auto B = SPresLetter::vertex(1, 1);
  auto B2 = SPresLetter::vertex(1, 2);
  return {from_spres({A, B, A, B2}, g), from_spres({A, B2, A, B}, g)};
}

std::vector<GWord> short_loops(const GraphOfGroups& g, int max_edges) {
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

}  // namespace

TEST_CASE("fiber product of a graph with itself is the diagonal plus conjugates") {
  GraphOfGroups g = rose(2);
  BlockGraph d = fold(wedge(g, {rose_word(g, {0, 0}), rose_word(g, {1})}));
  FiberProduct fp = fiber_product(d, d);
  CHECK(blockgraphs_isomorphic(fp.base, d));
  SECTION("off-diagonal components exist and have computable ranks") {
    auto comps = conjugate_components(fp);
    CHECK(comps.size() > 1);
    for (const auto& c : comps) CHECK(c.rank >= 0);
  }
}

TEST_CASE("powers of x intersect in the larger power") {
  GraphOfGroups g = rose(2);
  BlockGraph h = fold(wedge(g, {rose_word(g, {0})}));
  BlockGraph k = fold(wedge(g, {rose_word(g, {0, 0})}));
  FiberProduct fp = fiber_product(h, k);
  CoreData c = intersection_core(fp);
  CHECK(c.rank == 1);
  CHECK(c.reduced_rank == 0);
  CHECK(c.psi_vertices() == 2);  // a two-step cycle over x
  CHECK(c.psi_positive_edges() == 2);
  CHECK(member(fp.base, rose_word(g, {0, 0})));
  CHECK_FALSE(member(fp.base, rose_word(g, {0})));
}

TEST_CASE("mixed powers: <x^2, y> meets <x, y^2>") {
  GraphOfGroups g = rose(2);
  BlockGraph h = fold(wedge(g, {rose_word(g, {0, 0}), rose_word(g, {1})}));
  BlockGraph k = fold(wedge(g, {rose_word(g, {0}), rose_word(g, {1, 1})}));
  FiberProduct fp = fiber_product(h, k);
  CoreData c = intersection_core(fp);
  CHECK(c.rank == 2);
  CHECK(c.reduced_rank == 1);
  CHECK(member(fp.base, rose_word(g, {0, 0})));
  CHECK(member(fp.base, rose_word(g, {1, 1})));
  CHECK_FALSE(member(fp.base, rose_word(g, {0})));
  CHECK_FALSE(member(fp.base, rose_word(g, {1})));
}

TEST_CASE("disjoint cyclic subgroups intersect trivially") {
  GraphOfGroups g = rose(2);
  BlockGraph h = fold(wedge(g, {rose_word(g, {0})}));
  BlockGraph k = fold(wedge(g, {rose_word(g, {1})}));
  FiberProduct fp = fiber_product(h, k);
  CoreData c = intersection_core(fp);
  CHECK(c.trivial);
  CHECK(c.rank == 0);
  for (const GWord& w : short_loops(g, 4))
    if (!is_identity(g, w)) CHECK_FALSE(member(fp.base, w));
}

TEST_CASE("membership in the base component is the conjunction") {
  struct Case {
    GraphOfGroups g;
    std::vector<GWord> gh, gk;
  };
  std::vector<Case> cases;
  {
    GraphOfGroups g = rose(2);
    auto gh = std::vector<GWord>{rose_word(g, {0, 0}), rose_word(g, {1})};
    auto gk = std::vector<GWord>{rose_word(g, {0}), rose_word(g, {1, 1})};
    cases.push_back({std::move(g), gh, gk});
  }
  {
    GraphOfGroups g = z2_z3();
    auto gens = z6_kernel_gens(g);
    auto gh = std::vector<GWord>{gens[0]};
    auto gk = std::vector<GWord>{gens[1]};
    cases.push_back({std::move(g), gh, gk});
  }
  for (const Case& c : cases) {
    BlockGraph h = fold(wedge(c.g, c.gh));
    BlockGraph k = fold(wedge(c.g, c.gk));
    FiberProduct fp = fiber_product(h, k);
    for (const GWord& w : short_loops(c.g, 4))
      CHECK(member(fp.base, w) == (member(h, w) && member(k, w)));
  }
}

TEST_CASE("projections are locally injective on the whole product") {
  std::vector<GraphOfGroups> gs;
  gs.push_back(rose(2));
  gs.push_back(z2_z3());
  gs.push_back(z4_z6_over_z2());
  for (const GraphOfGroups& g : gs) {
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<GWord> gh, gk;
      for (int i = 0; i < 2; ++i) {
        GWord a = random_element(g, 5, 600 + 41 * trial + i);
        GWord b = random_element(g, 5, 6000 + 43 * trial + i);
        if (!is_identity(g, a)) gh.push_back(a);
        if (!is_identity(g, b)) gk.push_back(b);
      }
      if (gh.empty() || gk.empty()) continue;
      BlockGraph h, k;
      try {
        h = fold(wedge(g, gh));
        k = fold(wedge(g, gk));
      } catch (const FreeActionViolation&) {
        continue;
      }
      FiberProduct fp = fiber_product(h, k);
      SerreGraph pg = fp.underlying();
      SerreGraph hg = h.underlying();
      SerreGraph kg = k.underlying();
      GraphMorphism ph = fp.project(true, pg, hg);
      GraphMorphism pk = fp.project(false, pg, kg);
      REQUIRE(ph.valid());
      REQUIRE(pk.valid());
      CHECK(is_locally_injective(ph).injective);
      CHECK(is_locally_injective(pk).injective);
    }
  }
}

TEST_CASE("multiplicity table") {
  SECTION("trivial edge groups never exceed one") {
    GraphOfGroups g = rose(2);
    BlockGraph h = fold(wedge(g, {rose_word(g, {0, 0}), rose_word(g, {1})}));
    BlockGraph k = fold(wedge(g, {rose_word(g, {0}), rose_word(g, {1, 1})}));
    MultiplicityTable t = multiplicity_table(fiber_product(h, k));
    CHECK(t.within_m_prime);
    CHECK(t.max_multiplicity <= 1);
  }
  SECTION("identical subgroups hit exactly the diagonal") {
    GraphOfGroups g = z2_z3();
    BlockGraph d = fold(wedge(g, z6_kernel_gens(g)));
    MultiplicityTable t = multiplicity_table(fiber_product(d, d));
    CoreData c = core_of(d);
    CHECK(t.max_multiplicity == 1);
    CHECK(t.counts.size() == c.packet_of.size());
    for (const auto& [key, n] : t.counts) {
      CHECK(key.first == key.second);
      CHECK(n == 1);
    }
  }
}

TEST_CASE("vertex fibers can exceed the edge-group bound") {
  // H = <t>, K = <t^-1 a> in Z/2 * Z: t * (t^-1 a) = a is a product in HK
  // stabilizing the base vertex, so the base component carries two blocks
  // over the basepoint pair even though every edge multiplicity is <= m' = 1.
  // Vertex fibers are bounded by the vertex group order, not by m'.
  GraphOfGroups g = hnn_z2_trivial();
  BlockGraph h = fold(wedge(g, {loop(g, 0, {{0, 0}})}));
  BlockGraph k = fold(wedge(g, {loop(g, 0, {{1, 1}})}));  // t^-1 a
  FiberProduct fp = fiber_product(h, k);
  std::map<std::pair<int, int>, int> vertex_fiber;
  for (int blk = 0; blk < static_cast<int>(fp.base.blocks.size()); ++blk) {
    const FiberProduct::PBlock& pb = fp.pblocks[fp.base_pblock_of[blk]];
    ++vertex_fiber[{pb.left, pb.right}];
  }
  int max_fiber = 0;
  for (const auto& [key, n] : vertex_fiber) {
    max_fiber = std::max(max_fiber, n);
    CHECK(n <= g.vgroup(fp.pblocks[0].type).order);
  }
  CHECK(max_fiber == 2);
  CHECK(g.max_edge_group_order() == 1);
  // The intersection itself is trivial.
  CHECK(intersection_core(fp).trivial);
}

TEST_CASE("degree chain diagnostics") {
  GraphOfGroups g = rose(2);
  SECTION("identical subgroups live on the diagonal") {
    BlockGraph d = fold(wedge(g, {rose_word(g, {0, 0}), rose_word(g, {1, 1})}));
    FiberProduct fp = fiber_product(d, d);
    DegreeChainReport rep = degree_chain_diagnostics(fp);
    CHECK(rep.degree_bounds_hold);
    CHECK(rep.sum_bounds_hold);
    CHECK(rep.per_pair_holds);
    CHECK(rep.global_sum_identity);
    for (const PairDiagnostics& d2 : rep.pairs) {
      if (d2.vertex_h == d2.vertex_k) {
        REQUIRE(d2.fiber_degrees.size() == 1);
        CHECK(d2.fiber_degrees[0] == d2.deg_a);
        CHECK(d2.deg_a == d2.deg_b);
      }
    }
  }
  SECTION("empty fibers hold vacuously") {
    BlockGraph h = fold(wedge(g, {rose_word(g, {0, 0}), rose_word(g, {1})}));
    BlockGraph k = fold(wedge(g, {rose_word(g, {0}), rose_word(g, {1, 1})}));
    DegreeChainReport rep = degree_chain_diagnostics(fiber_product(h, k));
    bool saw_empty = false;
    for (const PairDiagnostics& d : rep.pairs)
      if (d.fiber_degrees.empty()) {
        saw_empty = true;
        CHECK(d.degree_bound);
        CHECK(d.sum_bound);
        CHECK(d.per_pair);
      }
    CHECK(saw_empty);
    CHECK(rep.global_sum_identity);
  }
}

TEST_CASE("verify_bound on the landmark cases") {
  SECTION("whole F2 against itself") {
    GraphOfGroups g = rose(2);
    auto gens = std::vector<GWord>{rose_word(g, {0}), rose_word(g, {1})};
    BoundReport r = verify_bound(g, gens, gens);
    CHECK(r.rbar_h == 1);
    CHECK(r.rbar_k == 1);
    CHECK(r.rbar_hk == 1);
    CHECK(r.m_prime == 1);
    CHECK(r.bound == 6);
    CHECK(r.bound_holds);
    CHECK(r.all_hold());
    CHECK(r.hn_informational);
  }
  SECTION("Z/6 kernel against itself") {
    GraphOfGroups g = z2_z3();
    auto gens = z6_kernel_gens(g);
    BoundReport r = verify_bound(g, gens, gens);
    CHECK(r.rank_hk == 2);
    CHECK(r.rbar_hk == 1);
    CHECK(r.m_prime == 1);
    CHECK(r.bound == 6);
    CHECK(r.all_hold());
  }
  SECTION("violations are tagged with the subgroup name") {
    GraphOfGroups g = z2_z3();
    try {
      verify_bound(g, {amalgam_a(g, 1)}, z6_kernel_gens(g));
      FAIL("expected FreeActionViolation");
    } catch (const FreeActionViolation& e) {
      CHECK(e.subgroup == "H");
    }
    try {
      verify_bound(g, z6_kernel_gens(g), {amalgam_a(g, 1)});
      FAIL("expected FreeActionViolation");
    } catch (const FreeActionViolation& e) {
      CHECK(e.subgroup == "K");
    }
  }
}

TEST_CASE("bound symmetry in the intersection rank") {
  GraphOfGroups g = rose(2);
  auto gh = std::vector<GWord>{rose_word(g, {0, 0}), rose_word(g, {1})};
  auto gk = std::vector<GWord>{rose_word(g, {0}), rose_word(g, {1, 1})};
  BoundReport a = verify_bound(g, gh, gk);
  BoundReport b = verify_bound(g, gk, gh);
  CHECK(a.rbar_hk == b.rbar_hk);
  CHECK(a.rank_hk == b.rank_hk);
}

TEST_CASE("intersection core matches the tree oracle") {
  GraphOfGroups g = rose(2);
  auto gh = std::vector<GWord>{rose_word(g, {0, 0}), rose_word(g, {1})};
  auto gk = std::vector<GWord>{rose_word(g, {0}), rose_word(g, {1, 1})};
  BlockGraph h = fold(wedge(g, gh));
  BlockGraph k = fold(wedge(g, gk));
  FiberProduct fp = fiber_product(h, k);
  CoreData c = intersection_core(fp);

  TreeBall ball = build_ball(g, 6);
  ElementSet hs = enumerate_subgroup(g, gh, 4);
  ElementSet ks = enumerate_subgroup(g, gk, 4);
  ElementSet both;
  both.length = 4;
  both.gen_max_len = std::max(hs.gen_max_len, ks.gen_max_len);
  both.gens = gh;
  for (const GWord& w : hs.elements)
    if (ks.contains_nf(w)) {
      both.elements.push_back(w);
      both.keys.insert(ElementSet::key_of(w));
    }
  QuotientResult q = detail::quotient_graph(ball, both, ball.radius - both.gen_max_len);
  CoreResult oracle_core = core(q.graph);
  CHECK(fundamental_rank(oracle_core.core) == c.rank);
  CHECK(graphs_isomorphic(oracle_core.core, c.psi));
}

TEST_CASE("conjugate components") {
  SECTION("trivial subgroup yields nothing") {
    GraphOfGroups g = rose(2);
    BlockGraph h = fold(wedge(g, {}));
    BlockGraph k = fold(wedge(g, {rose_word(g, {0})}));
    CHECK(conjugate_components(fiber_product(h, k)).empty());
  }
  SECTION("single component for the full cyclic diagonal") {
    GraphOfGroups g = rose(1);
    BlockGraph h = fold(wedge(g, {rose_word(g, {0})}));
    auto comps = conjugate_components(fiber_product(h, h));
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].rank == 1);
  }
}

TEST_CASE("ambient mismatch is rejected") {
  GraphOfGroups g1 = rose(2);
  GraphOfGroups g2 = rose(2);
  BlockGraph h = fold(wedge(g1, {rose_word(g1, {0})}));
  BlockGraph k = fold(wedge(g2, {rose_word(g2, {0})}));
  CHECK_THROWS_AS(fiber_product(h, k), AmbientMismatch);
}
