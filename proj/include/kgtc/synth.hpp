#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgtc/graph.hpp"

namespace kgtc {

/// Typed toy knowledge graph. Entities are split evenly into classes; each
/// relation gets a planted (domain class, range class) signature. Inside a
/// class, entities are further grouped into clusters, and each relation links
/// every subject cluster to `preferred_clusters` object clusters (each object
/// cluster receives the same number of links), which gives
/// the graph latent structure beyond the types. Signal triples use those links
/// first and spill over into the rest of the signature block if needed.
struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t entities_per_class = 50;
  std::size_t relations = 6;
  std::size_t triples_per_relation = 500;
  double noise = 0.05;  ///< fraction of each relation's triples drawn ignoring the signature
  std::size_t clusters_per_class = 10;
  std::size_t preferred_clusters = 2;
  std::uint64_t seed = 0;

  /// Throws ConfigError for out-of-range fields or an infeasible triple count.
  void validate() const;
};

struct Signature {
  std::size_t domain_class = 0;
  std::size_t range_class = 0;
};

struct SyntheticGraph {
  std::vector<std::array<std::string, 3>> triples;
  std::vector<std::pair<std::string, std::string>> types;  ///< entity, class
  std::vector<std::string> class_names;
  std::vector<std::string> relation_names;
  std::vector<Signature> signatures;  ///< per relation
  std::vector<bool> is_noise;         ///< per triple
};

SyntheticGraph generate_synthetic(const SyntheticSpec& spec);

/// Writes triples.tsv, types.tsv and constraints.tsv into `dir`.
void write_synthetic(const SyntheticGraph& graph, const std::filesystem::path& dir);

std::string entity_label(std::size_t cls, std::size_t index);

}  // namespace kgtc
