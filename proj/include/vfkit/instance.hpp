#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vfkit/graph_of_groups.hpp"

namespace vfkit {

// On-disk instance document. Canonical serialization is UTF-8 JSON with
// sorted keys and no insignificant whitespace; trivial groups are written as
// the string "trivial".
//
// Word syntax: whitespace-separated tokens, "v:g" for the vertex-group
// element g at vertex v (entering the presentation as r_v g r_v^-1) and
// "k+" / "k-" for the stable letter of positive edge k and its inverse.
// "id" denotes the empty word.
struct InstanceDocument {
  RawGraphOfGroups raw;
  std::map<std::string, std::vector<std::string>> subgroups;
};

namespace detail {

inline std::vector<std::vector<Elt>> parse_group_table(const nlohmann::json& j,
                                                       const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() != "trivial")
      throw SchemaError(where + ": unknown group shorthand '" + j.get<std::string>() + "'");
    return {{0}};
  }
  if (!j.is_array()) throw SchemaError(where + ": expected a multiplication table or \"trivial\"");
  std::vector<std::vector<Elt>> table;
  for (const auto& row : j) {
    if (!row.is_array()) throw SchemaError(where + ": table rows must be arrays");
    std::vector<Elt> r;
    for (const auto& x : row) {
      if (!x.is_number_integer()) throw SchemaError(where + ": table entries must be integers");
      r.push_back(x.get<Elt>());
    }
    table.push_back(std::move(r));
  }
  return table;
}

inline std::vector<Elt> parse_map(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of element indices");
  std::vector<Elt> m;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw SchemaError(where + ": map entries must be integers");
    m.push_back(x.get<Elt>());
  }
  return m;
}

}  // namespace detail

inline InstanceDocument parse_instance(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("instance document must be a JSON object");
  for (const char* key : {"base_vertex", "graph", "vertex_groups", "edge_groups", "embeddings"})
    if (!j.contains(key)) throw SchemaError(std::string("missing key '") + key + "'");

  InstanceDocument doc;
  const auto& jg = j.at("graph");
  if (!jg.is_object() || !jg.contains("vertices") || !jg.contains("edges"))
    throw SchemaError("graph needs 'vertices' and 'edges'");
  if (!jg.at("vertices").is_number_integer() || jg.at("vertices").get<int>() <= 0)
    throw SchemaError("graph.vertices must be a positive integer");
  int nv = jg.at("vertices").get<int>();
  doc.raw.y = SerreGraph(nv);
  if (!jg.at("edges").is_array()) throw SchemaError("graph.edges must be an array");
  for (const auto& je : jg.at("edges")) {
    if (!je.is_object() || !je.contains("src") || !je.contains("dst"))
      throw SchemaError("each edge needs 'src' and 'dst'");
    int s = je.at("src").get<int>(), d = je.at("dst").get<int>();
    if (s < 0 || s >= nv || d < 0 || d >= nv) throw SchemaError("edge endpoint out of range");
    doc.raw.y.add_edge_pair(s, d);
  }
  int pairs = doc.raw.y.num_positive_edges();

  const auto& jv = j.at("vertex_groups");
  if (!jv.is_array() || static_cast<int>(jv.size()) != nv)
    throw SchemaError("vertex_groups must list one group per vertex");
  for (int v = 0; v < nv; ++v)
    doc.raw.vertex_tables.push_back(
        detail::parse_group_table(jv[v], "vertex_groups[" + std::to_string(v) + "]"));

  const auto& je = j.at("edge_groups");
  if (!je.is_array() || static_cast<int>(je.size()) != pairs)
    throw SchemaError("edge_groups must list one group per positive edge");
  for (int k = 0; k < pairs; ++k)
    doc.raw.edge_tables.push_back(
        detail::parse_group_table(je[k], "edge_groups[" + std::to_string(k) + "]"));

  const auto& jm = j.at("embeddings");
  if (!jm.is_array() || static_cast<int>(jm.size()) != pairs)
    throw SchemaError("embeddings must list one {alpha, omega} per positive edge");
  for (int k = 0; k < pairs; ++k) {
    const auto& jk = jm[k];
    if (!jk.is_object() || !jk.contains("alpha") || !jk.contains("omega"))
      throw SchemaError("embeddings[" + std::to_string(k) + "] needs 'alpha' and 'omega'");
    doc.raw.alpha_maps.push_back(
        detail::parse_map(jk.at("alpha"), "embeddings[" + std::to_string(k) + "].alpha"));
    doc.raw.alpha_maps.push_back(
        detail::parse_map(jk.at("omega"), "embeddings[" + std::to_string(k) + "].omega"));
  }

  if (!j.at("base_vertex").is_number_integer()) throw SchemaError("base_vertex must be an integer");
  doc.raw.base_vertex = j.at("base_vertex").get<int>();
  if (doc.raw.base_vertex < 0 || doc.raw.base_vertex >= nv)
    throw SchemaError("base_vertex out of range");

  if (j.contains("subgroups")) {
    if (!j.at("subgroups").is_object()) throw SchemaError("subgroups must be an object");
    for (const auto& [name, words] : j.at("subgroups").items()) {
      if (!words.is_array()) throw SchemaError("subgroup '" + name + "' must be a word array");
      std::vector<std::string> list;
      for (const auto& w : words) {
        if (!w.is_string()) throw SchemaError("subgroup words must be strings");
        list.push_back(w.get<std::string>());
      }
      doc.subgroups[name] = std::move(list);
    }
  }
  return doc;
}

inline nlohmann::json serialize_instance(const InstanceDocument& doc) {
  nlohmann::json j;
  j["base_vertex"] = doc.raw.base_vertex;
  j["graph"]["vertices"] = doc.raw.y.num_vertices();
  j["graph"]["edges"] = nlohmann::json::array();
  for (EdgeId e = 0; e < doc.raw.y.num_edges(); e += 2)
    j["graph"]["edges"].push_back({{"src", doc.raw.y.src(e)}, {"dst", doc.raw.y.dst(e)}});
  auto table_json = [](const std::vector<std::vector<Elt>>& t) -> nlohmann::json {
    if (t.size() == 1) return "trivial";
    return t;
  };
  j["vertex_groups"] = nlohmann::json::array();
  for (const auto& t : doc.raw.vertex_tables) j["vertex_groups"].push_back(table_json(t));
  j["edge_groups"] = nlohmann::json::array();
  for (const auto& t : doc.raw.edge_tables) j["edge_groups"].push_back(table_json(t));
  j["embeddings"] = nlohmann::json::array();
  for (size_t k = 0; 2 * k + 1 < doc.raw.alpha_maps.size(); ++k)
    j["embeddings"].push_back(
        {{"alpha", doc.raw.alpha_maps[2 * k]}, {"omega", doc.raw.alpha_maps[2 * k + 1]}});
  j["subgroups"] = nlohmann::json::object();
  for (const auto& [name, words] : doc.subgroups) j["subgroups"][name] = words;
  return j;
}

inline std::string canonical_text(const InstanceDocument& doc) {
  return serialize_instance(doc).dump() + "\n";
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_of(const InstanceDocument& doc) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_text(doc))));
  return buf;
}

inline InstanceDocument load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open instance file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("JSON parse error in '" + path + "': " + e.what());
  }
  return parse_instance(j);
}

inline void save_instance(const InstanceDocument& doc, const std::string& path) {
  std::ofstream out(path);
  out << canonical_text(doc);
}

// ---- word tokens ----------------------------------------------------------

inline SPresWord parse_tokens(const std::string& text) {
  SPresWord word;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok == "id") continue;
    auto colon = tok.find(':');
    try {
      if (colon != std::string::npos) {
        int v = std::stoi(tok.substr(0, colon));
        int g = std::stoi(tok.substr(colon + 1));
        word.push_back(SPresLetter::vertex(v, g));
      } else if (!tok.empty() && (tok.back() == '+' || tok.back() == '-')) {
        int k = std::stoi(tok.substr(0, tok.size() - 1));
        word.push_back(SPresLetter::stable(tok.back() == '+' ? 2 * k : 2 * k + 1));
      } else {
        throw SchemaError("unrecognized word token '" + tok + "'");
      }
    } catch (const std::invalid_argument&) {
      throw SchemaError("unrecognized word token '" + tok + "'");
    } catch (const std::out_of_range&) {
      throw SchemaError("word token out of range '" + tok + "'");
    }
  }
  return word;
}

inline GWord parse_word(const std::string& text, const GraphOfGroups& g) {
  return from_spres(parse_tokens(text), g);
}

// Token rendering of a loop word; parses back to the same group element.
inline std::string word_tokens(const GraphOfGroups& g, const GWord& w) {
  std::ostringstream out;
  bool first = true;
  auto emit = [&](const std::string& s) {
    if (!first) out << ' ';
    out << s;
    first = false;
  };
  if (w.head != 0) emit(std::to_string(w.base) + ":" + std::to_string(w.head));
  for (const GSyllable& s : w.tail) {
    emit(std::to_string(s.edge / 2) + (SerreGraph::is_positive(s.edge) ? "+" : "-"));
    if (s.coeff != 0)
      emit(std::to_string(g.y.dst(s.edge)) + ":" + std::to_string(s.coeff));
  }
  if (first) return "id";
  return out.str();
}

// Parsed, validated instance ready for computation.
struct LoadedInstance {
  GraphOfGroups gog;
  std::map<std::string, std::vector<GWord>> subgroups;
  std::string digest;
};

inline LoadedInstance build_instance(const InstanceDocument& doc) {
  LoadedInstance inst;
  inst.gog = validate_gog(doc.raw);
  inst.digest = digest_of(doc);
  for (const auto& [name, words] : doc.subgroups) {
    std::vector<GWord> gens;
    for (const std::string& w : words) gens.push_back(parse_word(w, inst.gog));
    inst.subgroups[name] = std::move(gens);
  }
  return inst;
}

}  // namespace vfkit
