#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vfkit/corpus.hpp"
#include "vfkit/instance.hpp"
#include "vfkit/intersection.hpp"
#include "vfkit/subgroup_folding.hpp"
#include "vfkit/tree_oracle.hpp"
#include "vfkit/version.hpp"

namespace vfkit {

// Exit codes: 0 ok, 2 schema/usage, 3 algebra, 4 free-action violation,
// 5 internal check or bound failure, 6 caps exceeded.
inline constexpr int kExitSchema = 2;
inline constexpr int kExitAlgebra = 3;
inline constexpr int kExitViolation = 4;
inline constexpr int kExitInternal = 5;
inline constexpr int kExitCaps = 6;

namespace cli_detail {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Wall-clock data stays on stderr so stdout reports are byte-deterministic.
inline void report_time(std::ostream& err, const Timer& t, const std::string& what) {
  err << "# " << what << " took " << t.seconds() << "s\n";
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const FreeActionViolation& e) {
    err << "error: " << e.what();
    if (!e.subgroup.empty()) err << " (subgroup " << e.subgroup << ")";
    err << "\n";
    return kExitViolation;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCaps;
  } catch (const InternalCheckFailure& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const UnknownEdge& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const UnknownElement& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const BaseMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const IdentityGenerator& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitAlgebra;
  }
}

inline const std::vector<GWord>& named_subgroup(const LoadedInstance& inst,
                                                const std::string& name) {
  auto it = inst.subgroups.find(name);
  if (it == inst.subgroups.end()) throw SchemaError("no subgroup named '" + name + "'");
  return it->second;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  out << data;
}

inline const char* yn(bool b) { return b ? "true" : "false"; }
inline const char* pf(bool b) { return b ? "pass" : "FAIL"; }

}  // namespace cli_detail

inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    InstanceDocument doc = load_instance(path);
    LoadedInstance inst = build_instance(doc);
    const GraphOfGroups& g = inst.gog;
    int tree_edges = static_cast<int>(g.spanning.size());
    int hnn_edges = g.y.num_positive_edges() - tree_edges;
    out << kToolName << " " << kToolVersion << " validate\n";
    out << "instance " << path << "\n";
    out << "digest " << inst.digest << "\n";
    out << "vertices " << g.y.num_vertices() << "\n";
    out << "edge pairs " << g.y.num_positive_edges() << "\n";
    out << "amalgamation steps (tree edges) " << tree_edges << "\n";
    out << "hnn steps (non-tree edges) " << hnn_edges << "\n";
    out << "vertex group orders";
    for (const auto& vg : g.vertex_groups) out << " " << vg.order;
    out << "\n";
    out << "edge group orders";
    for (const auto& eg : g.edge_pair_groups) out << " " << eg.order;
    out << "\n";
    out << "m_prime " << g.max_edge_group_order() << "\n";
    out << "base vertex " << g.base_vertex << "\n";
    for (const auto& [name, gens] : inst.subgroups)
      out << "subgroup " << name << " generators " << gens.size() << "\n";
    out << "ok\n";
    return 0;
  });
}

struct RankOptions {
  std::string dot_path;       // write the folded graph when nonempty
  std::string core_dot_path;  // write the core when nonempty
  bool show_generators = false;
};

inline int cmd_rank(const std::string& path, const std::string& subgroup,
                    const RankOptions& opt, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    cli_detail::Timer timer;
    LoadedInstance inst = build_instance(load_instance(path));
    const std::vector<GWord>& gens = cli_detail::named_subgroup(inst, subgroup);
    BlockGraph folded;
    try {
      folded = fold(wedge(inst.gog, gens));
    } catch (FreeActionViolation e) {
      e.subgroup = subgroup;
      throw e;
    }
    CoreData core_data = core_of(folded);
    out << kToolName << " " << kToolVersion << " rank\n";
    out << "instance " << path << "\n";
    out << "digest " << inst.digest << "\n";
    out << "subgroup " << subgroup << " generators " << gens.size() << "\n";
    out << "blocks " << folded.blocks.size() << "\n";
    out << "packets " << folded.packets.size() << "\n";
    out << "trivial " << cli_detail::yn(core_data.trivial) << "\n";
    out << "psi vertices " << core_data.psi_vertices() << "\n";
    out << "psi positive edges " << core_data.psi_positive_edges() << "\n";
    out << "rank " << core_data.rank << "\n";
    out << "reduced rank " << core_data.reduced_rank << "\n";
    if (opt.show_generators) {
      std::vector<GWord> basis = free_generators(folded);
      out << "free generators " << basis.size() << "\n";
      for (const GWord& w : basis) out << "  " << word_tokens(inst.gog, w) << "\n";
    }
    if (!opt.dot_path.empty()) {
      std::ostringstream dot;
      write_dot(dot, folded);
      cli_detail::write_file(opt.dot_path, dot.str());
    }
    if (!opt.core_dot_path.empty() && !core_data.trivial) {
      std::ostringstream dot;
      write_dot(dot, core_data.psi, [&](VertexId v) {
        return "B" + std::to_string(core_data.block_of[v]);
      });
      cli_detail::write_file(opt.core_dot_path, dot.str());
    }
    cli_detail::report_time(err, timer, "rank");
    return 0;
  });
}

inline void render_bound_report(std::ostream& out, const BoundReport& r) {
  out << "m_prime " << r.m_prime << "\n";
  out << "rank " << r.subgroup_h << " " << r.rank_h << " reduced " << r.rbar_h << "\n";
  out << "rank " << r.subgroup_k << " " << r.rank_k << " reduced " << r.rbar_k << "\n";
  out << "rank intersection " << r.rank_hk << " reduced " << r.rbar_hk << "\n";
  out << "bound 6*m_prime*rbar(" << r.subgroup_h << ")*rbar(" << r.subgroup_k << ") = "
      << r.bound << "\n";
  out << "theorem bound: " << (r.bound_holds ? "holds" : "FAILS") << "\n";
  if (r.trivial_edge_groups)
    out << "free-product bound (constant 6): " << (r.ivanov_bound_holds ? "holds" : "FAILS")
        << "\n";
  out << "informational rbar <= rbar*rbar: " << cli_detail::yn(r.hn_informational) << "\n";
  out << "m_lower (max observed multiplicity) " << r.m_lower << "\n";
  out << "lemma: projections locally injective: " << cli_detail::pf(r.lemma1_local_injectivity)
      << "\n";
  out << "lemma: core projects into cores: " << cli_detail::pf(r.lemma5_core_projection) << "\n";
  out << "lemma: fiber degree bounds: " << cli_detail::pf(r.lemma6_degree_bounds) << "\n";
  out << "lemma: fiber degree sums: " << cli_detail::pf(r.lemma6_sum_bounds) << "\n";
  out << "lemma: per-pair inequality: " << cli_detail::pf(r.per_pair_inequality) << "\n";
  out << "lemma: multiplicity <= m_prime: " << cli_detail::pf(r.lemma3_multiplicity) << "\n";
  out << "lemma: degree sum identities: " << cli_detail::pf(r.lemma4_sum_identity) << "\n";
}

struct IntersectOptions {
  std::string dot_path;  // fiber product export
  bool diagnostics = false;
};

inline int cmd_intersect(const std::string& path, const std::string& name_h,
                         const std::string& name_k, const IntersectOptions& opt,
                         std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    cli_detail::Timer timer;
    LoadedInstance inst = build_instance(load_instance(path));
    const std::vector<GWord>& gh = cli_detail::named_subgroup(inst, name_h);
    const std::vector<GWord>& gk = cli_detail::named_subgroup(inst, name_k);
    BoundReport r = verify_bound(inst.gog, gh, gk, name_h, name_k);
    out << kToolName << " " << kToolVersion << " intersect\n";
    out << "instance " << path << "\n";
    out << "digest " << inst.digest << "\n";
    render_bound_report(out, r);
    if (opt.diagnostics || !opt.dot_path.empty()) {
      BlockGraph dh = fold(wedge(inst.gog, gh));
      BlockGraph dk = fold(wedge(inst.gog, gk));
      FiberProduct fp = fiber_product(dh, dk);
      if (opt.diagnostics) {
        DegreeChainReport chain = degree_chain_diagnostics(fp);
        int empty_pairs = 0;
        for (const PairDiagnostics& d : chain.pairs) {
          if (d.fiber_degrees.empty()) {
            ++empty_pairs;
            continue;
          }
          out << "pair a=" << d.vertex_h << " b=" << d.vertex_k << " deg_a=" << d.deg_a
              << " deg_b=" << d.deg_b << " fiber_degrees=[";
          for (size_t i = 0; i < d.fiber_degrees.size(); ++i)
            out << (i ? "," : "") << d.fiber_degrees[i];
          out << "] bounds=" << (d.degree_bound && d.sum_bound && d.per_pair ? "ok" : "FAIL")
              << "\n";
        }
        out << "empty pairs " << empty_pairs << " (hold vacuously)\n";
        out << "sum(deg-2) " << chain.sum_deg_minus_2 << " = 2*rbar "
            << cli_detail::yn(chain.global_sum_identity) << "\n";
        auto comps = conjugate_components(fp);
        out << "components with packets " << comps.size() << "\n";
        for (const auto& c : comps)
          out << "  component " << c.component << " blocks " << c.blocks << " packets "
              << c.packets << " rank " << c.rank << "\n";
      }
      if (!opt.dot_path.empty()) {
        std::ostringstream dot;
        write_dot(dot, fp);
        cli_detail::write_file(opt.dot_path, dot.str());
      }
    }
    cli_detail::report_time(err, timer, "intersect");
    if (!r.all_hold()) {
      err << "internal error: a guaranteed bound or lemma failed; this is a bug\n";
      return kExitInternal;
    }
    return 0;
  });
}

inline int cmd_member(const std::string& path, const std::string& subgroup,
                      const std::string& word_text, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    LoadedInstance inst = build_instance(load_instance(path));
    const std::vector<GWord>& gens = cli_detail::named_subgroup(inst, subgroup);
    BlockGraph folded;
    try {
      folded = fold(wedge(inst.gog, gens));
    } catch (FreeActionViolation e) {
      e.subgroup = subgroup;
      throw e;
    }
    GWord w = parse_word(word_text, inst.gog);
    out << (member(folded, w) ? "true" : "false") << "\n";
    return 0;
  });
}

struct OracleOptions {
  int radius = 8;
  int length = 6;
  int max_ball = kMaxBallVertices;
  int max_elements = kMaxElementSet;
};

namespace cli_detail {

// Graph distance from the basepoint block to the farthest core block: the
// core is fully visible in the oracle's inner region only when the inner
// radius reaches this depth, so smaller views are inconclusive, not wrong.
inline int core_block_depth(const BlockGraph& b, const CoreData& psi) {
  if (psi.trivial) return 0;
  std::vector<int> dist(b.blocks.size(), -1);
  dist[b.basepoint.block] = 0;
  std::vector<int> queue{b.basepoint.block};
  for (size_t qi = 0; qi < queue.size(); ++qi)
    for (const BlockGraph::Packet& p : b.packets)
      for (auto [from, to] : {std::pair{p.src, p.dst}, std::pair{p.dst, p.src}})
        if (from == queue[qi] && dist[to] < 0) {
          dist[to] = dist[from] + 1;
          queue.push_back(to);
        }
  int depth = 0;
  for (int blk : psi.block_of) depth = std::max(depth, dist[blk]);
  return depth;
}

struct Corroboration {
  int fold_rank = 0;
  int oracle_rank = -1;
  int core_depth = 0;
  bool stabilized = false;
  bool conclusive = false;
  bool isomorphic = false;
  bool fixed_vertex = false;
  std::string verdict;  // corroborated | mismatch | inconclusive
};

// Compare the folded core against the stabilized oracle quotient. psi_vtypes
// and psi_etypes label the folded core with its Y types.
inline Corroboration corroborate(const QuotientResult& q, const BlockGraph& folded,
                                 const CoreData& psi, const std::vector<int>& psi_vtypes,
                                 const std::vector<int>& psi_etypes) {
  Corroboration c;
  c.fold_rank = psi.rank;
  c.core_depth = core_block_depth(folded, psi);
  c.stabilized = q.stabilized;
  c.fixed_vertex = q.fixed_vertex_found;
  c.conclusive = q.stabilized && q.base_class >= 0 && q.inner_radius >= c.core_depth;
  if (q.base_class >= 0) {
    try {
      CoreResult qc = core(q.graph);
      c.oracle_rank = fundamental_rank(qc.core);
      if (!psi.trivial) {
        std::vector<int> qv_types, qe_types;
        for (VertexId v : qc.vertex_map) qv_types.push_back(q.vtype[v]);
        for (EdgeId e : qc.edge_map) qe_types.push_back(q.edge_type[e]);
        c.isomorphic =
            isomorphic_impl(qc.core, psi.psi, &qv_types, &psi_vtypes, &qe_types, &psi_etypes);
      }
    } catch (const IsATree&) {
      c.oracle_rank = 0;
      c.isomorphic = psi.trivial;
    }
  }
  if (psi.trivial && c.oracle_rank == 0) c.isomorphic = true;
  if (!c.conclusive)
    c.verdict = "inconclusive";
  else if (c.isomorphic && c.oracle_rank == c.fold_rank && !c.fixed_vertex)
    c.verdict = "corroborated";
  else
    c.verdict = "mismatch";
  return c;
}

inline void psi_type_labels(const BlockGraph& folded, const CoreData& psi,
                            std::vector<int>& vtypes, std::vector<int>& etypes) {
  vtypes.clear();
  etypes.clear();
  for (int blk : psi.block_of) vtypes.push_back(folded.blocks[blk].type);
  for (int pk : psi.packet_of) {
    etypes.push_back(folded.packets[pk].etype);
    etypes.push_back(SerreGraph::inv(folded.packets[pk].etype));
  }
}

}  // namespace cli_detail

inline int cmd_oracle(const std::string& path, const std::vector<std::string>& subgroups,
                      const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    cli_detail::Timer timer;
    LoadedInstance inst = build_instance(load_instance(path));
    const GraphOfGroups& g = inst.gog;
    if (subgroups.empty() || subgroups.size() > 2)
      throw SchemaError("oracle takes one subgroup or a pair");

    out << kToolName << " " << kToolVersion << " oracle\n";
    out << "instance " << path << "\n";
    out << "digest " << inst.digest << "\n";
    out << "radius " << opt.radius << " length " << opt.length << "\n";

    TreeBall ball = build_ball(g, opt.radius, opt.max_ball);
    out << "ball vertices " << ball.vertex_count() << "\n";

    // Folding side (may legitimately raise a violation; then the oracle's
    // job is to corroborate the fixed point).
    bool violation = false;
    CoreData psi;
    std::vector<int> psi_vtypes, psi_etypes;
    std::vector<ElementSet> sets;
    for (const std::string& name : subgroups)
      sets.push_back(enumerate_subgroup(g, cli_detail::named_subgroup(inst, name), opt.length,
                                        opt.max_elements));

    ElementSet hs;
    if (subgroups.size() == 1) {
      hs = sets[0];
    } else {
      hs.length = opt.length;
      hs.gen_max_len = std::max(sets[0].gen_max_len, sets[1].gen_max_len);
      hs.gens = sets[0].gens;
      for (const GWord& w : sets[0].elements)
        if (sets[1].contains_nf(w)) {
          hs.elements.push_back(w);
          hs.keys.insert(ElementSet::key_of(w));
        }
    }
    out << "element set " << hs.elements.size() << "\n";

    BlockGraph folded;
    try {
      if (subgroups.size() == 1) {
        folded = fold(wedge(g, cli_detail::named_subgroup(inst, subgroups[0])));
        psi = core_of(folded);
      } else {
        BlockGraph dh = fold(wedge(g, cli_detail::named_subgroup(inst, subgroups[0])));
        BlockGraph dk = fold(wedge(g, cli_detail::named_subgroup(inst, subgroups[1])));
        FiberProduct fp = fiber_product(dh, dk);
        folded = fp.base;
        psi = intersection_core(fp);
        out << "stab_count_lower " << stab_count_lower(ball, sets[0], sets[1]) << "\n";
        out << "m_prime " << g.max_edge_group_order() << "\n";
      }
      cli_detail::psi_type_labels(folded, psi, psi_vtypes, psi_etypes);
    } catch (const FreeActionViolation& e) {
      violation = true;
      out << "folding: free action violation at vertex " << e.vertex_type << "\n";
      QuotientResult q = quotient_ball(ball, hs, opt.max_ball, opt.max_elements);
      out << "oracle fixed vertex found " << cli_detail::yn(q.fixed_vertex_found) << "\n";
      out << "verdict " << (q.fixed_vertex_found ? "violation corroborated" : "inconclusive")
          << "\n";
      cli_detail::report_time(err, timer, "oracle");
      throw;
    }

    QuotientResult q = quotient_ball(ball, hs, opt.max_ball, opt.max_elements);
    cli_detail::Corroboration c =
        cli_detail::corroborate(q, folded, psi, psi_vtypes, psi_etypes);
    out << "inner radius " << q.inner_radius << "\n";
    out << "core block depth " << c.core_depth << "\n";
    out << "stabilized " << cli_detail::yn(c.stabilized) << "\n";
    out << "fixed vertex found " << cli_detail::yn(c.fixed_vertex) << "\n";
    out << "folding rank " << c.fold_rank << "\n";
    out << "oracle core rank " << c.oracle_rank << "\n";
    out << "isomorphic " << cli_detail::yn(c.isomorphic) << "\n";
    out << "verdict " << c.verdict << "\n";
    cli_detail::report_time(err, timer, "oracle");
    if (c.verdict == "mismatch") {
      err << "internal error: stabilized oracle disagrees with folding\n";
      return kExitInternal;
    }
    return 0;
  });
}

struct CorpusOptions {
  std::uint64_t seed = 1;
  int count = 100;
  CorpusProfile profile = CorpusProfile::Mixed;
  int max_generators = 4;
  int max_syllables = 8;
  bool run_oracle = true;
  int oracle_radius = 3;
  int oracle_length = 1;
};

struct CorpusTotals {
  int instances = 0;
  int bound_ok = 0;
  int lemmas_ok = 0;
  int ivanov_applicable = 0;
  int ivanov_ok = 0;
  int hn_ok = 0;
  int oracle_corroborated = 0;
  int oracle_inconclusive = 0;
  int oracle_mismatch = 0;
  bool pass() const {
    return bound_ok == instances && lemmas_ok == instances && oracle_mismatch == 0 &&
           ivanov_ok == ivanov_applicable;
  }
};

inline CorpusTotals run_corpus(const CorpusOptions& opt, std::ostream& out) {
  Rng master(opt.seed);
  CorpusTotals totals;
  out << kToolName << " " << kToolVersion << " corpus\n";
  out << "seed " << opt.seed << " count " << opt.count << " profile "
      << profile_name(opt.profile) << "\n";
  for (int i = 0; i < opt.count; ++i) {
    Rng rng = master.fork(i);
    CorpusInstance ci =
        make_corpus_instance(opt.profile, rng, opt.max_generators, opt.max_syllables);
    LoadedInstance inst = build_instance(ci.doc);
    const std::vector<GWord>& gh = inst.subgroups.at("H");
    const std::vector<GWord>& gk = inst.subgroups.at("K");
    BoundReport r = verify_bound(inst.gog, gh, gk);
    bool lemmas = r.lemma1_local_injectivity && r.lemma5_core_projection &&
                  r.lemma6_degree_bounds && r.lemma6_sum_bounds && r.per_pair_inequality &&
                  r.lemma3_multiplicity && r.lemma4_sum_identity;
    std::string oracle = "skipped";
    if (opt.run_oracle) {
      oracle = "corroborated";
      for (const auto* gens : {&gh, &gk}) {
        TreeBall ball = build_ball(inst.gog, opt.oracle_radius);
        ElementSet hs = enumerate_subgroup(inst.gog, *gens, opt.oracle_length);
        QuotientResult q = quotient_ball(ball, hs);
        BlockGraph folded = fold(wedge(inst.gog, *gens));
        CoreData psi = core_of(folded);
        if (!q.stabilized || q.base_class < 0) {
          if (oracle == "corroborated") oracle = "inconclusive";
          continue;
        }
        int orank;
        try {
          orank = fundamental_rank(core(q.graph).core);
        } catch (const IsATree&) {
          orank = 0;
        }
        if (orank != psi.rank) oracle = "mismatch";
      }
    }
    ++totals.instances;
    if (r.bound_holds) ++totals.bound_ok;
    if (lemmas) ++totals.lemmas_ok;
    if (r.trivial_edge_groups) {
      ++totals.ivanov_applicable;
      if (r.ivanov_bound_holds) ++totals.ivanov_ok;
    }
    if (r.hn_informational) ++totals.hn_ok;
    if (opt.run_oracle) {
      if (oracle == "corroborated") ++totals.oracle_corroborated;
      else if (oracle == "inconclusive") ++totals.oracle_inconclusive;
      else ++totals.oracle_mismatch;
    }
    out << "[" << i << "] profile=" << profile_name(ci.profile) << " digest=" << inst.digest
        << " gens_h=" << gh.size() << " gens_k=" << gk.size() << " rbar_h=" << r.rbar_h
        << " rbar_k=" << r.rbar_k << " rbar_hk=" << r.rbar_hk << " m_prime=" << r.m_prime
        << " m_lower=" << r.m_lower << " bound=" << r.bound
        << " bound_ok=" << (r.bound_holds ? "yes" : "NO") << " lemmas=" << (lemmas ? "ok" : "FAIL")
        << " hn=" << (r.hn_informational ? "yes" : "no") << " oracle=" << oracle
        << " resamples=" << ci.resamples << "\n";
  }
  out << "instances " << totals.instances << "\n";
  out << "bound_holds " << totals.bound_ok << "/" << totals.instances << "\n";
  out << "lemma_suite " << totals.lemmas_ok << "/" << totals.instances << "\n";
  out << "free_product_bound " << totals.ivanov_ok << "/" << totals.ivanov_applicable << "\n";
  out << "hn_informational " << totals.hn_ok << "/" << totals.instances << "\n";
  if (opt.run_oracle)
    out << "oracle corroborated " << totals.oracle_corroborated << " inconclusive "
        << totals.oracle_inconclusive << " mismatch " << totals.oracle_mismatch << "\n";
  out << "result " << (totals.pass() ? "PASS" : "FAIL") << "\n";
  return totals;
}

inline int cmd_corpus(const CorpusOptions& opt, std::ostream& out, std::ostream& err) {
  return cli_detail::guarded(err, [&] {
    cli_detail::Timer timer;
    CorpusTotals totals = run_corpus(opt, out);
    cli_detail::report_time(err, timer, "corpus");
    if (!totals.pass()) {
      err << "internal error: corpus verdicts must hold on every instance\n";
      return kExitInternal;
    }
    return 0;
  });
}

}  // namespace vfkit
