#pragma once

#include <string>
#include <vector>

#include "vfkit/instance.hpp"
#include "vfkit/rng.hpp"
#include "vfkit/subgroup_folding.hpp"

namespace vfkit {

enum class CorpusProfile { Free, Amalgam, Hnn, Mixed };

inline const char* profile_name(CorpusProfile p) {
  switch (p) {
    case CorpusProfile::Free: return "free";
    case CorpusProfile::Amalgam: return "amalgam";
    case CorpusProfile::Hnn: return "hnn";
    case CorpusProfile::Mixed: return "mixed";
  }
  return "?";
}

inline bool parse_profile(const std::string& s, CorpusProfile& out) {
  if (s == "free") out = CorpusProfile::Free;
  else if (s == "amalgam") out = CorpusProfile::Amalgam;
  else if (s == "hnn") out = CorpusProfile::Hnn;
  else if (s == "mixed") out = CorpusProfile::Mixed;
  else return false;
  return true;
}

struct CorpusInstance {
  InstanceDocument doc;  // carries subgroups H and K as token words
  CorpusProfile profile = CorpusProfile::Free;
  int resamples = 0;     // generator sets discarded for torsion
};

namespace detail {

inline std::vector<std::vector<Elt>> cyclic_table(int n) {
  std::vector<std::vector<Elt>> t(n, std::vector<Elt>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  return t;
}

// Even cyclic groups admit a Z/2 subgroup {0, n/2}.
inline std::vector<Elt> z2_embedding(int order) { return {0, order / 2}; }

inline RawGraphOfGroups random_raw(CorpusProfile profile, Rng& rng) {
  RawGraphOfGroups raw;
  auto trivial = std::vector<std::vector<Elt>>{{0}};
  switch (profile) {
    case CorpusProfile::Free: {
      int loops = 1 + rng.below_int(3);
      raw.y = SerreGraph(1);
      for (int i = 0; i < loops; ++i) raw.y.add_edge_pair(0, 0);
      raw.vertex_tables = {trivial};
      raw.edge_tables.assign(loops, trivial);
      raw.alpha_maps.assign(2 * loops, {0});
      break;
    }
    case CorpusProfile::Amalgam: {
      raw.y = SerreGraph(2);
      raw.y.add_edge_pair(0, 1);
      bool z2_edge = rng.coin();
      if (z2_edge) {
        // The edge group must be proper in both factors or the amalgam
        // collapses to a finite group.
        int orders[] = {4, 6};
        int a = orders[rng.below_int(2)], b = orders[rng.below_int(2)];
        raw.vertex_tables = {cyclic_table(a), cyclic_table(b)};
        raw.edge_tables = {cyclic_table(2)};
        raw.alpha_maps = {z2_embedding(a), z2_embedding(b)};
      } else {
        int orders[] = {2, 3, 4, 6};
        int a = orders[rng.below_int(4)], b = orders[rng.below_int(4)];
        raw.vertex_tables = {cyclic_table(a), cyclic_table(b)};
        raw.edge_tables = {trivial};
        raw.alpha_maps = {{0}, {0}};
      }
      break;
    }
    case CorpusProfile::Hnn: {
      raw.y = SerreGraph(1);
      raw.y.add_edge_pair(0, 0);
      bool z2_edge = rng.coin();
      if (z2_edge) {
        int orders[] = {2, 4, 6};
        int a = orders[rng.below_int(3)];
        raw.vertex_tables = {cyclic_table(a)};
        raw.edge_tables = {cyclic_table(2)};
        raw.alpha_maps = {z2_embedding(a), z2_embedding(a)};
      } else {
        int orders[] = {2, 3, 4};
        int a = orders[rng.below_int(3)];
        raw.vertex_tables = {cyclic_table(a)};
        raw.edge_tables = {trivial};
        raw.alpha_maps = {{0}, {0}};
      }
      break;
    }
    case CorpusProfile::Mixed: {
      // A segment plus a loop at one end: one amalgamation, one HNN letter.
      raw.y = SerreGraph(2);
      raw.y.add_edge_pair(0, 1);
      raw.y.add_edge_pair(0, 0);
      int orders[] = {2, 3, 4, 6};
      int a = orders[rng.below_int(4)];
      int b = orders[rng.below_int(4)];
      raw.vertex_tables = {cyclic_table(a), cyclic_table(b)};
      bool z2_seg = a > 2 && b > 2 && a % 2 == 0 && b % 2 == 0 && rng.coin();
      raw.edge_tables.push_back(z2_seg ? cyclic_table(2) : trivial);
      raw.alpha_maps.push_back(z2_seg ? z2_embedding(a) : std::vector<Elt>{0});
      raw.alpha_maps.push_back(z2_seg ? z2_embedding(b) : std::vector<Elt>{0});
      bool z2_loop = a % 2 == 0 && rng.coin();
      raw.edge_tables.push_back(z2_loop ? cyclic_table(2) : trivial);
      raw.alpha_maps.push_back(z2_loop ? z2_embedding(a) : std::vector<Elt>{0});
      raw.alpha_maps.push_back(z2_loop ? z2_embedding(a) : std::vector<Elt>{0});
      break;
    }
  }
  raw.base_vertex = 0;
  return raw;
}

// Random generator set that folds without a free-action violation.
inline std::vector<GWord> free_generator_set(const GraphOfGroups& g, int max_gens,
                                             int max_syllables, Rng& rng, int& resamples) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    int count = 1 + rng.below_int(max_gens);
    std::vector<GWord> gens;
    for (int i = 0; i < count; ++i) {
      GWord w = random_element(g, max_syllables, rng.next());
      if (!is_identity(g, w)) gens.push_back(w);
    }
    if (gens.empty()) {
      ++resamples;
      continue;
    }
    try {
      fold(wedge(g, gens));
      return gens;
    } catch (const FreeActionViolation&) {
      ++resamples;
    }
  }
  throw InternalCheckFailure("could not sample a freely acting subgroup in 500 attempts");
}

}  // namespace detail

// One deterministic corpus instance: an ambient graph of groups and two
// freely acting subgroups H, K. K is sampled fresh, shares generators with
// H, or equals H, so nontrivial intersections occur regularly.
inline CorpusInstance make_corpus_instance(CorpusProfile profile, Rng& rng, int max_gens = 4,
                                           int max_syllables = 8) {
  CorpusInstance inst;
  inst.profile = profile;
  CorpusProfile effective = profile;
  if (profile == CorpusProfile::Mixed) {
    // Rotate over every shape, including the two-edge mixed graph.
    CorpusProfile all[] = {CorpusProfile::Free, CorpusProfile::Amalgam, CorpusProfile::Hnn,
                           CorpusProfile::Mixed};
    effective = all[rng.below_int(4)];
  }
  inst.doc.raw = detail::random_raw(effective, rng);
  GraphOfGroups g = validate_gog(inst.doc.raw);

  std::vector<GWord> h = detail::free_generator_set(g, max_gens, max_syllables, rng, inst.resamples);
  std::vector<GWord> k;
  switch (rng.below_int(4)) {
    case 0:  // independent
      k = detail::free_generator_set(g, max_gens, max_syllables, rng, inst.resamples);
      break;
    case 1: {  // overlap: share a generator with H
      k = detail::free_generator_set(g, max_gens, max_syllables, rng, inst.resamples);
      k.push_back(h[rng.below_int(static_cast<int>(h.size()))]);
      try {
        fold(wedge(g, k));
      } catch (const FreeActionViolation&) {
        ++inst.resamples;
        k = h;  // fall back to a guaranteed-free choice
      }
      break;
    }
    case 2:  // identical subgroups
      k = h;
      break;
    default: {  // subgroup of H: products of H generators (free, so no retries)
      for (size_t i = 0; i + 1 < h.size(); i += 2) {
        GWord p = multiply(g, h[i], h[i + 1]);
        if (!is_identity(g, p)) k.push_back(p);
      }
      if (k.empty()) k.push_back(multiply(g, h[0], h[0]));
      break;
    }
  }

  for (const GWord& w : h)
    inst.doc.subgroups["H"].push_back(word_tokens(g, w));
  for (const GWord& w : k)
    inst.doc.subgroups["K"].push_back(word_tokens(g, w));
  return inst;
}

}  // namespace vfkit
