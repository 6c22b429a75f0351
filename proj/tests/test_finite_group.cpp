#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "vfkit/finite_group.hpp"

using namespace vfkit;

TEST_CASE("trivial group validates") {
  FiniteGroup g = validate_group({{0}});
  CHECK(g.order == 1);
  CHECK(g.inv(0) == 0);
}

TEST_CASE("Z/2 validates") {
  FiniteGroup g = validate_group({{0, 1}, {1, 0}});
  CHECK(g.order == 2);
  CHECK(g.mul(1, 1) == 0);
  CHECK(g.inv(1) == 1);
}

TEST_CASE("missing inverse is rejected") {
  // product(1,1) = 1 with 1 != 0: row {1,1} repeats, and 1 has no inverse.
  CHECK_THROWS_AS(validate_group({{0, 1}, {1, 1}}), NotAGroup);
}

TEST_CASE("non-associative latin square is rejected") {
  // The smallest non-associative loop has order 5.
  std::vector<std::vector<Elt>> t = {
      {0, 1, 2, 3, 4},
      {1, 0, 3, 4, 2},
      {2, 4, 0, 1, 3},
      {3, 2, 4, 0, 1},
      {4, 3, 1, 2, 0},
  };
  try {
    validate_group(t);
    FAIL("expected NotAGroup");
  } catch (const NotAGroup& e) {
    CHECK(e.reason == NotAGroup::Reason::Associativity);
  }
}

TEST_CASE("oversized table is rejected") {
  CHECK_THROWS_AS(cyclic_group(65), GroupTooLarge);
}

TEST_CASE("inverse is an involution on every validated group") {
  for (int n : {1, 2, 3, 4, 6, 8, 12}) {
    FiniteGroup g = cyclic_group(n);
    for (Elt i = 0; i < g.order; ++i) CHECK(g.inv(g.inv(i)) == i);
  }
  FiniteGroup s3 = validate_group(fixtures::s3_table());
  for (Elt i = 0; i < s3.order; ++i) CHECK(s3.inv(s3.inv(i)) == i);
}

TEST_CASE("monomorphism validation") {
  FiniteGroup z2 = cyclic_group(2);
  FiniteGroup z3 = cyclic_group(3);
  FiniteGroup z4 = cyclic_group(4);

  SECTION("identity map") {
    Monomorphism m = validate_mono(z2, z2, {0, 1});
    CHECK(m(1) == 1);
  }
  SECTION("Z/2 into Z/4 hits the order-2 element") {
    Monomorphism m = validate_mono(z2, z4, {0, 2});
    CHECK(m(1) == 2);
  }
  SECTION("Z/2 cannot map into Z/3") {
    CHECK_THROWS_AS(validate_mono(z2, z3, {0, 1}), NotHomomorphism);
  }
  SECTION("non-injective map is rejected") {
    CHECK_THROWS_AS(validate_mono(z2, z2, {0, 0}), NotInjective);
  }
}

TEST_CASE("left transversal shape and determinism") {
  FiniteGroup z2 = cyclic_group(2);
  FiniteGroup z4 = cyclic_group(4);
  FiniteGroup z6 = cyclic_group(6);

  SECTION("identity mono has a single coset") {
    auto tr = left_transversal(validate_mono(z4, z4, {0, 1, 2, 3}));
    CHECK(tr == std::vector<Elt>{0});
  }
  SECTION("Z/2 in Z/4") {
    auto tr = left_transversal(validate_mono(z2, z4, {0, 2}));
    CHECK(tr == std::vector<Elt>{0, 1});
  }
  SECTION("trivial subgroup gives all elements in order") {
    auto tr = left_transversal(validate_mono(trivial_group(), z6, {0}));
    CHECK(tr == std::vector<Elt>{0, 1, 2, 3, 4, 5});
  }
}

TEST_CASE("transversal covers the target with disjoint cosets") {
  FiniteGroup s3 = validate_group(fixtures::s3_table());
  FiniteGroup z3 = cyclic_group(3);
  Monomorphism m = validate_mono(z3, s3, {0, 1, 2});  // rotations inside S3
  auto tr = left_transversal(m);
  REQUIRE(tr.size() == 2);
  std::vector<int> hits(s3.order, 0);
  for (Elt t : tr)
    for (Elt c = 0; c < z3.order; ++c) ++hits[s3.mul(t, m(c))];
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("composition of monomorphisms validates") {
  FiniteGroup z2 = cyclic_group(2);
  FiniteGroup z4 = cyclic_group(4);
  FiniteGroup z8 = cyclic_group(8);
  Monomorphism inner = validate_mono(z2, z4, {0, 2});
  Monomorphism outer = validate_mono(z4, z8, {0, 2, 4, 6});
  Monomorphism both = compose(outer, inner);
  CHECK(both(1) == 4);
}
