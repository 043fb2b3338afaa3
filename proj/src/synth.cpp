#include "kgtc/synth.hpp"

#include <set>

#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/io.hpp"
#include "kgtc/random.hpp"

namespace kgtc {

std::string entity_label(std::size_t cls, std::size_t index) { return fmt::format("c{}_e{}", cls, index); }

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid synthetic spec: " + what); };
  if (classes < 1 || entities_per_class < 1 || relations < 1) fail("classes, entities and relations must be >= 1");
  if (!(noise >= 0.0 && noise < 1.0)) fail("noise must lie in [0, 1)");
  if (clusters_per_class < 1 || clusters_per_class > entities_per_class) {
    fail("clusters_per_class must lie in [1, entities_per_class]");
  }
  if (preferred_clusters < 1 || preferred_clusters > clusters_per_class) {
    fail("preferred_clusters must lie in [1, clusters_per_class]");
  }
  if (triples_per_relation > entities_per_class * entities_per_class) {
    fail(fmt::format("{} triples per relation exceed the {} pairs of a signature block", triples_per_relation,
                     entities_per_class * entities_per_class));
  }
}

SyntheticGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticGraph g;
  const std::size_t C = spec.classes;
  const std::size_t E = spec.entities_per_class;
  const std::size_t K = spec.clusters_per_class;

  for (std::size_t c = 0; c < C; ++c) g.class_names.push_back(fmt::format("Class{}", c));
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < E; ++i) g.types.emplace_back(entity_label(c, i), g.class_names[c]);
  }
  // Entity i of a class sits in cluster i % K.

  const auto noise_count = static_cast<std::size_t>(std::llround(spec.noise * spec.triples_per_relation));
  for (std::size_t r = 0; r < spec.relations; ++r) {
    g.relation_names.push_back(fmt::format("rel{}", r));
    const Signature sig{uniform_index(rng, C), uniform_index(rng, C)};
    g.signatures.push_back(sig);

    // preferred[a] lists the object clusters linked from subject cluster a:
    // a run of consecutive clusters starting at perm[a], so every object
    // cluster is linked equally often.
    std::vector<std::size_t> perm(K);
    for (std::size_t k = 0; k < K; ++k) perm[k] = k;
    for (std::size_t i = 0; i + 1 < K; ++i) std::swap(perm[i], perm[i + uniform_index(rng, K - i)]);
    std::vector<std::vector<std::size_t>> preferred(K);
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t j = 0; j < spec.preferred_clusters; ++j) preferred[a].push_back((perm[a] + j) % K);
    }

    std::set<std::pair<std::string, std::string>> seen;
    auto emit = [&](std::string s, std::string o, bool noise) {
      if (!seen.emplace(s, o).second) return false;
      g.triples.push_back({std::move(s), g.relation_names.back(), std::move(o)});
      g.is_noise.push_back(noise);
      return true;
    };

    for (std::size_t made = 0; made < noise_count;) {
      const std::size_t sc = uniform_index(rng, C), oc = uniform_index(rng, C);
      if (emit(entity_label(sc, uniform_index(rng, E)), entity_label(oc, uniform_index(rng, E)), true)) ++made;
    }
    // Signal pairs come from the preferred clusters first; once those are
    // used up the rest of the signature block fills in.
    std::vector<std::pair<std::size_t, std::size_t>> preferred_pairs, other_pairs;
    for (std::size_t s = 0; s < E; ++s) {
      std::vector<bool> linked(K, false);
      for (std::size_t k : preferred[s % K]) linked[k] = true;
      for (std::size_t o = 0; o < E; ++o) (linked[o % K] ? preferred_pairs : other_pairs).emplace_back(s, o);
    }
    std::size_t needed = spec.triples_per_relation - noise_count;
    for (auto* pool : {&preferred_pairs, &other_pairs}) {
      for (std::size_t i = 0; i < pool->size() && needed > 0; ++i) {
        std::swap((*pool)[i], (*pool)[i + uniform_index(rng, pool->size() - i)]);
        const auto [s, o] = (*pool)[i];
        if (emit(entity_label(sig.domain_class, s), entity_label(sig.range_class, o), false)) --needed;
      }
    }
    if (needed > 0) throw ConfigError(fmt::format("relation {}: signature block too small for its triples", r));
  }
  return g;
}

void write_synthetic(const SyntheticGraph& graph, const std::filesystem::path& dir) {
  std::string triples, types, constraints;
  for (const auto& t : graph.triples) triples += fmt::format("{}\t{}\t{}\n", t[0], t[1], t[2]);
  for (const auto& [entity, cls] : graph.types) types += fmt::format("{}\t{}\n", entity, cls);
  for (std::size_t r = 0; r < graph.relation_names.size(); ++r) {
    constraints += fmt::format("{}\t{}\t{}\n", graph.relation_names[r],
                               graph.class_names[graph.signatures[r].domain_class],
                               graph.class_names[graph.signatures[r].range_class]);
  }
  io::write_text(dir / "triples.tsv", triples);
  io::write_text(dir / "types.tsv", types);
  io::write_text(dir / "constraints.tsv", constraints);
}

}  // namespace kgtc
