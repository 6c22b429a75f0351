// vfkit: core graphs, ranks and intersection bounds for free subgroups of
// fundamental groups of finite graphs of finite groups.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfkit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"subgroup graphs, ranks and intersection bounds in virtually free groups"};
  app.set_version_flag("--version", std::string(vfkit::kToolName) + " " + vfkit::kToolVersion);
  app.require_subcommand(1);

  std::string path, subgroup, subgroup_k, word;
  vfkit::RankOptions rank_opt;
  vfkit::IntersectOptions intersect_opt;
  vfkit::OracleOptions oracle_opt;
  vfkit::CorpusOptions corpus_opt;
  std::string profile_name = "mixed";
  std::vector<std::string> oracle_subgroups;

  CLI::App* validate = app.add_subcommand("validate", "parse and validate an instance document");
  validate->add_option("path", path, "instance JSON file")->required();

  CLI::App* rank = app.add_subcommand("rank", "fold a subgroup and report its rank data");
  rank->add_option("path", path, "instance JSON file")->required();
  rank->add_option("subgroup", subgroup, "subgroup name")->required();
  rank->add_option("--dot", rank_opt.dot_path, "write the folded subgroup graph as DOT");
  rank->add_option("--core-dot", rank_opt.core_dot_path, "write the core as DOT");
  rank->add_flag("--gens", rank_opt.show_generators, "print a free generating set");

  CLI::App* intersect =
      app.add_subcommand("intersect", "verify the intersection rank bound for two subgroups");
  intersect->add_option("path", path, "instance JSON file")->required();
  intersect->add_option("H", subgroup, "first subgroup name")->required();
  intersect->add_option("K", subgroup_k, "second subgroup name")->required();
  intersect->add_option("--dot", intersect_opt.dot_path, "write the fiber product as DOT");
  intersect->add_flag("--diagnostics", intersect_opt.diagnostics,
                      "print per-vertex-pair degree diagnostics");

  CLI::App* member = app.add_subcommand("member", "decide membership of a word in a subgroup");
  member->add_option("path", path, "instance JSON file")->required();
  member->add_option("subgroup", subgroup, "subgroup name")->required();
  member->add_option("word", word, "word in token syntax, e.g. '0:1 0+ 1:2 0-'")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "corroborate folding against the bounded tree quotient");
  oracle->add_option("path", path, "instance JSON file")->required();
  oracle->add_option("subgroups", oracle_subgroups, "one subgroup, or two for the intersection")
      ->required()
      ->expected(1, 2);
  oracle->add_option("-R,--radius", oracle_opt.radius, "tree ball radius (default 8, cap 12)");
  oracle->add_option("-L,--length", oracle_opt.length, "generator product length (default 6)");
  oracle->add_option("--max-ball", oracle_opt.max_ball, "ball vertex cap (default 1000000)");
  oracle->add_option("--max-elements", oracle_opt.max_elements,
                     "element set cap (default 100000)");

  CLI::App* corpus =
      app.add_subcommand("corpus", "generate random instances and verify every bound");
  corpus->add_option("--seed", corpus_opt.seed, "RNG seed (env VFKIT_SEED overrides)");
  corpus->add_option("--count", corpus_opt.count, "number of instances (default 100)");
  corpus->add_option("--profile", profile_name, "free | amalgam | hnn | mixed (default mixed)");
  corpus->add_option("--max-generators", corpus_opt.max_generators,
                     "generators per subgroup (default 4)");
  corpus->add_option("--max-syllables", corpus_opt.max_syllables,
                     "edge syllables per generator (default 8)");
  bool no_oracle = false;
  corpus->add_flag("--no-oracle", no_oracle, "skip the per-instance oracle corroboration");
  corpus->add_option("--oracle-radius", corpus_opt.oracle_radius,
                     "ball radius for corpus corroboration (default 3)");
  corpus->add_option("--oracle-length", corpus_opt.oracle_length,
                     "product length for corpus corroboration (default 1)");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return vfkit::cmd_validate(path, std::cout, std::cerr);
  if (rank->parsed()) return vfkit::cmd_rank(path, subgroup, rank_opt, std::cout, std::cerr);
  if (intersect->parsed())
    return vfkit::cmd_intersect(path, subgroup, subgroup_k, intersect_opt, std::cout, std::cerr);
  if (member->parsed()) return vfkit::cmd_member(path, subgroup, word, std::cout, std::cerr);
  if (oracle->parsed())
    return vfkit::cmd_oracle(path, oracle_subgroups, oracle_opt, std::cout, std::cerr);
  if (corpus->parsed()) {
    if (!vfkit::parse_profile(profile_name, corpus_opt.profile)) {
      std::cerr << "error: unknown profile '" << profile_name << "'\n";
      return vfkit::kExitSchema;
    }
    corpus_opt.run_oracle = !no_oracle;
    if (const char* env = std::getenv("VFKIT_SEED")) corpus_opt.seed = std::strtoull(env, nullptr, 10);
    return vfkit::cmd_corpus(corpus_opt, std::cout, std::cerr);
  }
  return 0;
}
