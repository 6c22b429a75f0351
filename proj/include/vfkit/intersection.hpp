#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "vfkit/subgroup_folding.hpp"

namespace vfkit {

// Fiber product of two folded subgroup graphs over one graph of groups.
// Product blocks are the diagonal G_v-orbits of element pairs, addressed as
// (left block, right block, delta): the orbit of pairs ((B,t), (C,delta*t)).
// Product packets pair packets of equal edge type whose transition sets match
// G_e-equivariantly; the component of the paired basepoints realizes the
// subgroup graph of the intersection.
struct FiberProduct {
  struct PBlock {
    int left = 0;
    int right = 0;
    Elt delta = 0;
    VertexId type = 0;
  };
  struct PPacket {
    EdgeId etype = 0;
    int src = 0;
    int dst = 0;
    Elt ax = 0;
    Elt ay = 0;
    int left_packet = 0;
    int right_packet = 0;
  };

  const BlockGraph* left = nullptr;
  const BlockGraph* right = nullptr;
  std::vector<PBlock> pblocks;
  std::vector<PPacket> ppackets;
  int base_pblock = -1;
  std::vector<int> component;  // per product block
  int base_component_id = -1;

  // The base component repackaged as a folded BlockGraph.
  BlockGraph base;
  std::vector<int> base_pblock_of;  // base block -> product block
  std::vector<int> base_ppacket_of; // base packet -> product packet

  SerreGraph underlying() const {
    SerreGraph g(static_cast<int>(pblocks.size()));
    for (const PPacket& p : ppackets) g.add_edge_pair(p.src, p.dst);
    return g;
  }

  GraphMorphism project(bool onto_left, const SerreGraph& product_graph,
                        const SerreGraph& factor_graph) const {
    GraphMorphism m;
    m.domain = &product_graph;
    m.codomain = &factor_graph;
    for (const PBlock& b : pblocks) m.vertex_map.push_back(onto_left ? b.left : b.right);
    for (const PPacket& p : ppackets) {
      int f = onto_left ? p.left_packet : p.right_packet;
      m.edge_map.push_back(2 * f);
      m.edge_map.push_back(2 * f + 1);
    }
    return m;
  }
};

inline FiberProduct fiber_product(const BlockGraph& left, const BlockGraph& right) {
  if (left.gog != right.gog)
    throw AmbientMismatch("fiber product needs one ambient graph of groups");
  if (!left.folded || !right.folded)
    throw AmbientMismatch("fiber product needs folded block graphs");
  const GraphOfGroups& g = *left.gog;
  FiberProduct fp;
  fp.left = &left;
  fp.right = &right;

  std::map<std::tuple<int, int, Elt>, int> pid;
  for (int b = 0; b < static_cast<int>(left.blocks.size()); ++b)
    for (int c = 0; c < static_cast<int>(right.blocks.size()); ++c) {
      if (left.blocks[b].type != right.blocks[c].type) continue;
      const FiniteGroup& gv = g.vgroup(left.blocks[b].type);
      for (Elt delta = 0; delta < gv.order; ++delta) {
        pid[{b, c, delta}] = static_cast<int>(fp.pblocks.size());
        fp.pblocks.push_back({b, c, delta, left.blocks[b].type});
      }
    }

  for (int i = 0; i < static_cast<int>(left.packets.size()); ++i)
    for (int j = 0; j < static_cast<int>(right.packets.size()); ++j) {
      const BlockGraph::Packet& p = left.packets[i];
      const BlockGraph::Packet& q = right.packets[j];
      if (p.etype != q.etype) continue;
      const FiniteGroup& ge = g.egroup(p.etype);
      const FiniteGroup& gs = g.vgroup(g.y.src(p.etype));
      const FiniteGroup& gd = g.vgroup(g.y.dst(p.etype));
      for (Elt c0 = 0; c0 < ge.order; ++c0) {
        Elt delta = gs.mul(gs.mul(q.ax, g.alpha_of(p.etype).map[c0]), gs.inv(p.ax));
        Elt delta2 = gd.mul(gd.mul(q.ay, g.omega_of(p.etype).map[c0]), gd.inv(p.ay));
        FiberProduct::PPacket pp;
        pp.etype = p.etype;
        pp.src = pid.at({p.src, q.src, delta});
        pp.dst = pid.at({p.dst, q.dst, delta2});
        pp.ax = p.ax;
        pp.ay = p.ay;
        pp.left_packet = i;
        pp.right_packet = j;
        BlockGraph::Packet anchor{pp.etype, pp.src, pp.dst, pp.ax, pp.ay};
        detail::canonicalize_anchor(g, anchor);
        pp.ax = anchor.ax;
        pp.ay = anchor.ay;
        fp.ppackets.push_back(pp);
      }
    }

  // Components of the product graph.
  std::vector<int> uf(fp.pblocks.size());
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int v) { return uf[v] == v ? v : uf[v] = find(uf[v]); };
  for (const FiberProduct::PPacket& p : fp.ppackets) uf[find(p.src)] = find(p.dst);
  std::map<int, int> comp_id;
  fp.component.resize(fp.pblocks.size());
  for (size_t v = 0; v < fp.pblocks.size(); ++v) {
    int root = find(static_cast<int>(v));
    auto [it, fresh] = comp_id.try_emplace(root, static_cast<int>(comp_id.size()));
    fp.component[v] = it->second;
  }
  fp.base_pblock = pid.at({left.basepoint.block, right.basepoint.block,
                           g.vgroup(left.blocks[left.basepoint.block].type)
                               .mul(right.basepoint.x,
                                    g.vgroup(left.blocks[left.basepoint.block].type)
                                        .inv(left.basepoint.x))});
  fp.base_component_id = fp.component[fp.base_pblock];

  // Assemble the base component as a BlockGraph, numbered breadth-first from
  // the paired basepoints.
  std::vector<int> new_id(fp.pblocks.size(), -1);
  std::vector<int> order{fp.base_pblock};
  new_id[fp.base_pblock] = 0;
  for (size_t qi = 0; qi < order.size(); ++qi)
    for (const FiberProduct::PPacket& p : fp.ppackets) {
      if (p.src != order[qi] && p.dst != order[qi]) continue;
      for (int nb : {p.src, p.dst})
        if (new_id[nb] < 0) {
          new_id[nb] = static_cast<int>(order.size());
          order.push_back(nb);
        }
    }
  fp.base.gog = &g;
  fp.base.folded = true;
  for (int v : order) {
    fp.base.blocks.push_back({fp.pblocks[v].type});
    fp.base_pblock_of.push_back(v);
  }
  fp.base.basepoint = {0, left.basepoint.x};
  for (int k = 0; k < static_cast<int>(fp.ppackets.size()); ++k) {
    const FiberProduct::PPacket& p = fp.ppackets[k];
    if (fp.component[p.src] != fp.base_component_id) continue;
    fp.base.packets.push_back({p.etype, new_id[p.src], new_id[p.dst], p.ax, p.ay});
    fp.base_ppacket_of.push_back(k);
  }
  return fp;
}

// Core of the base component; checks that it projects into both factor cores
// before returning (a guaranteed property, so failure is a bug).
inline CoreData intersection_core(const FiberProduct& fp) {
  CoreData hk = core_of(fp.base);
  if (hk.trivial) return hk;
  CoreData h = core_of(*fp.left);
  CoreData k = core_of(*fp.right);
  std::vector<bool> in_h_core(fp.left->packets.size(), false);
  std::vector<bool> in_k_core(fp.right->packets.size(), false);
  for (int p : h.packet_of) in_h_core[p] = true;
  for (int p : k.packet_of) in_k_core[p] = true;
  for (int edge : hk.packet_of) {
    const FiberProduct::PPacket& pp = fp.ppackets[fp.base_ppacket_of[edge]];
    if (!in_h_core[pp.left_packet] || !in_k_core[pp.right_packet])
      throw InternalCheckFailure("core of the intersection leaves a factor core");
  }
  return hk;
}

// Multiplicities of Lemma-3 type: for each pair of core edges of equal type,
// the number of intersection-core edges projecting onto both.
struct MultiplicityTable {
  std::map<std::pair<int, int>, int> counts;  // (left packet, right packet) -> N
  int max_multiplicity = 0;                   // certified lower bound for m
  bool within_m_prime = true;
};

inline MultiplicityTable multiplicity_table(const FiberProduct& fp) {
  MultiplicityTable table;
  CoreData hk = core_of(fp.base);
  if (hk.trivial) return table;
  int m_prime = fp.left->gog->max_edge_group_order();
  for (int edge : hk.packet_of) {
    const FiberProduct::PPacket& pp = fp.ppackets[fp.base_ppacket_of[edge]];
    int n = ++table.counts[{pp.left_packet, pp.right_packet}];
    table.max_multiplicity = std::max(table.max_multiplicity, n);
  }
  table.within_m_prime = table.max_multiplicity <= m_prime;
  return table;
}

// Per-(a, b) fiber diagnostics for the degree chain: a ranges over core
// vertices of H, b over core vertices of K; w_i over the intersection core.
struct PairDiagnostics {
  int vertex_h = 0;
  int vertex_k = 0;
  int deg_a = 0;
  int deg_b = 0;
  std::vector<int> fiber_degrees;
  bool degree_bound = true;   // deg w_i <= min(deg a, deg b)
  bool sum_bound = true;      // sum deg w_i <= m' deg a deg b
  bool per_pair = true;       // sum (deg w_i - 2) <= 3 m' (deg a - 2)(deg b - 2)
};

struct DegreeChainReport {
  std::vector<PairDiagnostics> pairs;
  bool degree_bounds_hold = true;
  bool sum_bounds_hold = true;
  bool per_pair_holds = true;
  long sum_deg_minus_2 = 0;
  bool global_sum_identity = true;  // sum (deg w - 2) == 2 rbar(H cap K)
};

inline DegreeChainReport degree_chain_diagnostics(const FiberProduct& fp) {
  const GraphOfGroups& g = *fp.left->gog;
  int m_prime = g.max_edge_group_order();
  DegreeChainReport report;
  CoreData hk = core_of(fp.base);
  CoreData h = core_of(*fp.left);
  CoreData k = core_of(*fp.right);
  if (hk.trivial) return report;

  // Core vertex index by block, for both factors.
  std::vector<int> h_core_vertex(fp.left->blocks.size(), -1);
  std::vector<int> k_core_vertex(fp.right->blocks.size(), -1);
  for (int v = 0; v < h.psi_vertices(); ++v) h_core_vertex[h.block_of[v]] = v;
  for (int v = 0; v < k.psi_vertices(); ++v) k_core_vertex[k.block_of[v]] = v;

  std::map<std::pair<int, int>, std::vector<int>> fibers;
  for (int w = 0; w < hk.psi_vertices(); ++w) {
    const FiberProduct::PBlock& pb = fp.pblocks[fp.base_pblock_of[hk.block_of[w]]];
    int a = h_core_vertex[pb.left];
    int b = k_core_vertex[pb.right];
    if (a < 0 || b < 0) throw InternalCheckFailure("fiber vertex projects outside a core");
    fibers[{a, b}].push_back(hk.degrees[w]);
    report.sum_deg_minus_2 += hk.degrees[w] - 2;
  }
  for (int a = 0; a < h.psi_vertices(); ++a)
    for (int b = 0; b < k.psi_vertices(); ++b) {
      PairDiagnostics d;
      d.vertex_h = a;
      d.vertex_k = b;
      d.deg_a = h.degrees[a];
      d.deg_b = k.degrees[b];
      auto it = fibers.find({a, b});
      if (it != fibers.end()) d.fiber_degrees = it->second;
      long sum = 0, sum2 = 0;
      for (int dw : d.fiber_degrees) {
        if (dw > std::min(d.deg_a, d.deg_b)) d.degree_bound = false;
        sum += dw;
        sum2 += dw - 2;
      }
      d.sum_bound = sum <= static_cast<long>(m_prime) * d.deg_a * d.deg_b;
      d.per_pair =
          sum2 <= 3L * m_prime * (d.deg_a - 2) * (d.deg_b - 2);
      report.degree_bounds_hold = report.degree_bounds_hold && d.degree_bound;
      report.sum_bounds_hold = report.sum_bounds_hold && d.sum_bound;
      report.per_pair_holds = report.per_pair_holds && d.per_pair;
      report.pairs.push_back(std::move(d));
    }
  report.global_sum_identity = report.sum_deg_minus_2 == 2L * hk.reduced_rank;
  return report;
}

struct ComponentRank {
  int component = 0;
  int blocks = 0;
  int packets = 0;
  int rank = 0;
};

// Rank report for every component of the full product that carries at least
// one packet. Components other than the base one witness intersections of
// conjugates; informational only.
inline std::vector<ComponentRank> conjugate_components(const FiberProduct& fp) {
  std::map<int, ComponentRank> by_comp;
  for (size_t v = 0; v < fp.pblocks.size(); ++v) {
    auto& c = by_comp[fp.component[v]];
    c.component = fp.component[v];
    ++c.blocks;
  }
  std::map<int, std::vector<int>> packets_by_comp;
  for (size_t k = 0; k < fp.ppackets.size(); ++k)
    packets_by_comp[fp.component[fp.ppackets[k].src]].push_back(static_cast<int>(k));
  std::vector<ComponentRank> out;
  for (auto& [comp, packets] : packets_by_comp) {
    ComponentRank c = by_comp[comp];
    c.packets = static_cast<int>(packets.size());
    // Rank of the component graph: |E+| - |V| + 1 over this component.
    c.rank = c.packets - c.blocks + 1;
    out.push_back(c);
  }
  return out;
}

// Everything the intersection bound needs, in one verifiable record.
struct BoundReport {
  std::string subgroup_h, subgroup_k;
  int rank_h = 0, rank_k = 0, rank_hk = 0;
  int rbar_h = 0, rbar_k = 0, rbar_hk = 0;
  int m_prime = 1;
  int m_lower = 0;
  long bound = 0;  // 6 m' rbar(H) rbar(K)
  bool bound_holds = false;
  bool trivial_edge_groups = false;
  bool ivanov_bound_holds = false;  // with constant exactly 6 (trivial edges)
  bool hn_informational = false;    // rbar(HK) <= rbar(H) rbar(K)
  bool lemma1_local_injectivity = false;
  bool lemma5_core_projection = false;
  bool lemma6_degree_bounds = false;
  bool lemma6_sum_bounds = false;
  bool per_pair_inequality = false;
  bool lemma3_multiplicity = false;
  bool lemma4_sum_identity = false;
  std::vector<int> degrees_h, degrees_k, degrees_hk;

  bool all_hold() const {
    return bound_holds && lemma1_local_injectivity && lemma5_core_projection &&
           lemma6_degree_bounds && lemma6_sum_bounds && per_pair_inequality &&
           lemma3_multiplicity && lemma4_sum_identity &&
           (!trivial_edge_groups || ivanov_bound_holds);
  }
};

inline BoundReport verify_bound(const GraphOfGroups& g, const std::vector<GWord>& gens_h,
                                const std::vector<GWord>& gens_k,
                                const std::string& name_h = "H",
                                const std::string& name_k = "K") {
  auto fold_tagged = [&](const std::vector<GWord>& gens, const std::string& name) {
    try {
      return fold(wedge(g, gens));
    } catch (FreeActionViolation e) {
      e.subgroup = name;
      throw e;
    }
  };
  BlockGraph dh = fold_tagged(gens_h, name_h);
  BlockGraph dk = fold_tagged(gens_k, name_k);
  FiberProduct fp = fiber_product(dh, dk);

  BoundReport r;
  r.subgroup_h = name_h;
  r.subgroup_k = name_k;
  CoreData ch = core_of(dh);
  CoreData ck = core_of(dk);
  CoreData chk = intersection_core(fp);
  r.rank_h = ch.rank;
  r.rank_k = ck.rank;
  r.rank_hk = chk.rank;
  r.rbar_h = ch.reduced_rank;
  r.rbar_k = ck.reduced_rank;
  r.rbar_hk = chk.reduced_rank;
  r.degrees_h = ch.degrees;
  r.degrees_k = ck.degrees;
  r.degrees_hk = chk.degrees;
  r.m_prime = g.max_edge_group_order();
  r.trivial_edge_groups = r.m_prime == 1;
  r.bound = 6L * r.m_prime * r.rbar_h * r.rbar_k;
  r.bound_holds = r.rbar_hk <= r.bound;
  r.ivanov_bound_holds = r.rbar_hk <= 6L * r.rbar_h * r.rbar_k;
  r.hn_informational = r.rbar_hk <= static_cast<long>(r.rbar_h) * r.rbar_k;

  SerreGraph product_graph = fp.underlying();
  SerreGraph left_graph = dh.underlying();
  SerreGraph right_graph = dk.underlying();
  GraphMorphism ph = fp.project(true, product_graph, left_graph);
  GraphMorphism pk = fp.project(false, product_graph, right_graph);
  r.lemma1_local_injectivity =
      ph.valid() && pk.valid() && is_locally_injective(ph).injective &&
      is_locally_injective(pk).injective;
  try {
    intersection_core(fp);
    r.lemma5_core_projection = true;
  } catch (const InternalCheckFailure&) {
    r.lemma5_core_projection = false;
  }
  DegreeChainReport chain = degree_chain_diagnostics(fp);
  r.lemma6_degree_bounds = chain.degree_bounds_hold;
  r.lemma6_sum_bounds = chain.sum_bounds_hold;
  r.per_pair_inequality = chain.per_pair_holds;
  MultiplicityTable table = multiplicity_table(fp);
  r.m_lower = table.max_multiplicity;
  r.lemma3_multiplicity = table.within_m_prime;

  auto euler_ok = [](const CoreData& c) {
    if (c.trivial) return true;
    long sum = 0;
    for (int d : c.degrees) sum += d - 2;
    return c.reduced_rank == c.psi_positive_edges() - c.psi_vertices() && sum == 2L * c.reduced_rank;
  };
  r.lemma4_sum_identity = euler_ok(ch) && euler_ok(ck) && euler_ok(chk);
  return r;
}

inline void write_dot(std::ostream& os, const FiberProduct& fp) {
  SerreGraph pg = fp.underlying();
  write_dot(
      os, pg,
      [&](VertexId v) {
        const FiberProduct::PBlock& b = fp.pblocks[v];
        return "(" + std::to_string(b.left) + "," + std::to_string(b.right) + ";" +
               std::to_string(b.delta) + ")";
      },
      [&](EdgeId e) {
        const FiberProduct::PPacket& p = fp.ppackets[e / 2];
        return "e" + std::to_string(p.etype / 2) + "->" + std::to_string(p.left_packet) + "," +
               std::to_string(p.right_packet);
      });
}

}  // namespace vfkit
