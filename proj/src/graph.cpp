#include "kgtc/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/log.hpp"

namespace kgtc {

EntityId Vocabulary::add_entity(std::string_view label) {
  auto [it, inserted] =
      entity_index_.try_emplace(std::string(label), static_cast<EntityId>(entity_labels_.size()));
  if (inserted) entity_labels_.emplace_back(label);
  return it->second;
}

RelationId Vocabulary::add_relation(std::string_view label) {
  auto [it, inserted] = relation_index_.try_emplace(std::string(label),
                                                    static_cast<RelationId>(relation_labels_.size()));
  if (inserted) relation_labels_.emplace_back(label);
  return it->second;
}

EntityId Vocabulary::entity_id(std::string_view label) const {
  auto it = entity_index_.find(std::string(label));
  if (it == entity_index_.end()) throw InputError(fmt::format("unknown entity '{}'", label));
  return it->second;
}

RelationId Vocabulary::relation_id(std::string_view label) const {
  auto it = relation_index_.find(std::string(label));
  if (it == relation_index_.end()) throw InputError(fmt::format("unknown relation '{}'", label));
  return it->second;
}

bool Vocabulary::has_entity(std::string_view label) const {
  return entity_index_.count(std::string(label)) != 0;
}

bool Vocabulary::has_relation(std::string_view label) const {
  return relation_index_.count(std::string(label)) != 0;
}

TripleStore::TripleStore(std::size_t num_entities, std::size_t num_relations)
    : num_entities_(num_entities), by_relation_(num_relations), incidence_(num_entities, 0) {}

TripleStore::TripleStore(std::size_t num_entities, std::size_t num_relations,
                         std::span<const Triple> triples)
    : TripleStore(num_entities, num_relations) {
  triples_.reserve(triples.size());
  members_.reserve(triples.size());
  for (const Triple& t : triples) insert(t);
}

bool TripleStore::insert(const Triple& t) {
  if (t.s >= num_entities_ || t.o >= num_entities_ || t.p >= by_relation_.size()) {
    throw std::out_of_range(fmt::format("triple ({}, {}, {}) outside store of {} entities, {} relations",
                                        t.s, t.p, t.o, num_entities_, by_relation_.size()));
  }
  if (!members_.insert(t).second) return false;
  by_relation_[t.p].push_back(triples_.size());
  triples_.push_back(t);
  ++incidence_[t.s];
  if (t.o != t.s) ++incidence_[t.o];
  return true;
}

LoadedGraph load_graph(std::span<const TripleRecord> records) {
  if (records.empty()) throw InputError("no triples supplied");
  LoadedGraph out;
  std::vector<Triple> triples;
  triples.reserve(records.size());
  for (const TripleRecord& rec : records) {
    if (rec.fields.size() != 3) {
      throw InputError(fmt::format("line {}: expected 3 tab-separated fields, got {}", rec.line,
                                   rec.fields.size()));
    }
    for (const auto& f : rec.fields) {
      if (f.empty()) throw InputError(fmt::format("line {}: empty field", rec.line));
    }
    const EntityId s = out.vocab.add_entity(rec.fields[0]);
    const RelationId p = out.vocab.add_relation(rec.fields[1]);
    const EntityId o = out.vocab.add_entity(rec.fields[2]);
    triples.push_back({s, p, o});
  }
  out.store = TripleStore(out.vocab.num_entities(), out.vocab.num_relations(), triples);
  out.duplicates_dropped = triples.size() - out.store.size();
  if (out.duplicates_dropped > 0) log::info("dropped {} duplicate triples", out.duplicates_dropped);
  return out;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::unconstrained: return "none";
    case Provenance::schema: return "schema";
    case Provenance::lcwa: return "lcwa";
  }
  return "none";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "none" || s == "unconstrained") return Provenance::unconstrained;
  if (s == "schema") return Provenance::schema;
  if (s == "lcwa") return Provenance::lcwa;
  throw ConfigError(fmt::format("unknown regime '{}'", s));
}

RelationSemantics::RelationSemantics(std::size_t num_entities, std::vector<Relation> relations)
    : num_entities_(num_entities), relations_(std::move(relations)) {
  domain_mask_.assign(relations_.size(), std::vector<std::uint8_t>(num_entities_, 0));
  range_mask_.assign(relations_.size(), std::vector<std::uint8_t>(num_entities_, 0));
  for (std::size_t p = 0; p < relations_.size(); ++p) {
    auto& rel = relations_[p];
    for (auto* side : {&rel.domain, &rel.range}) {
      std::sort(side->begin(), side->end());
      side->erase(std::unique(side->begin(), side->end()), side->end());
      if (!side->empty() && side->back() >= num_entities_) {
        throw std::out_of_range(fmt::format("relation {} admits entity {} >= {}", p, side->back(),
                                            num_entities_));
      }
    }
    for (EntityId e : rel.domain) domain_mask_[p][e] = 1;
    for (EntityId e : rel.range) range_mask_[p][e] = 1;
  }
}

RelationSemantics RelationSemantics::unconstrained(std::size_t num_entities,
                                                   std::size_t num_relations) {
  std::vector<EntityId> all(num_entities);
  for (std::size_t e = 0; e < num_entities; ++e) all[e] = static_cast<EntityId>(e);
  std::vector<Relation> relations(num_relations, Relation{all, all, Provenance::unconstrained});
  return RelationSemantics(num_entities, std::move(relations));
}

Provenance RelationSemantics::dominant_provenance() const {
  bool schema = false;
  for (const auto& rel : relations_) {
    if (rel.provenance == Provenance::lcwa) return Provenance::lcwa;
    schema = schema || rel.provenance == Provenance::schema;
  }
  return schema ? Provenance::schema : Provenance::unconstrained;
}

RelationSemantics resolve_schema_constraints(const Vocabulary& vocab, const TripleStore& store,
                                             const TypeAssignment& types,
                                             const ConstraintDeclarations& declarations) {
  const std::size_t n = vocab.num_entities();
  const std::size_t m = vocab.num_relations();

  // Class label -> member entities, ascending.
  std::map<std::string, std::vector<EntityId>, std::less<>> members;
  for (const auto& [entity, classes] : types) {
    if (entity >= n) throw InputError(fmt::format("typed entity id {} outside vocabulary", entity));
    for (const auto& c : classes) members[c].push_back(entity);
  }

  auto collect = [&](const std::vector<std::string>& classes) {
    std::vector<EntityId> out;
    for (const auto& c : classes) {
      auto it = members.find(c);
      if (it != members.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  };

  std::vector<RelationSemantics::Relation> relations;
  relations.reserve(m);
  std::vector<EntityId> all(n);
  for (std::size_t e = 0; e < n; ++e) all[e] = static_cast<EntityId>(e);

  std::size_t repaired = 0;
  for (RelationId p = 0; p < m; ++p) {
    auto decl = declarations.find(p);
    if (decl == declarations.end()) {
      relations.push_back({all, all, Provenance::unconstrained});
      continue;
    }
    RelationSemantics::Relation rel{collect(decl->second.domain_classes),
                                    collect(decl->second.range_classes), Provenance::schema};
    std::vector<std::uint8_t> in_dom(n, 0), in_rng(n, 0);
    for (EntityId e : rel.domain) in_dom[e] = 1;
    for (EntityId e : rel.range) in_rng[e] = 1;
    if (p < store.num_relations()) {
      for (std::size_t idx : store.relation_triples(p)) {
        const Triple& t = store.triples()[idx];
        if (!in_dom[t.s]) {
          in_dom[t.s] = 1;
          rel.domain.push_back(t.s);
          ++repaired;
        }
        if (!in_rng[t.o]) {
          in_rng[t.o] = 1;
          rel.range.push_back(t.o);
          ++repaired;
        }
      }
    }
    relations.push_back(std::move(rel));
  }
  if (repaired > 0) {
    log::info("schema constraints: admitted {} entity slots from violating triples", repaired);
  }
  return RelationSemantics(n, std::move(relations));
}

LcwaSets derive_lcwa(const TripleStore& store, RelationId relation) {
  if (relation >= store.num_relations()) {
    throw std::out_of_range(fmt::format("relation {} >= {}", relation, store.num_relations()));
  }
  LcwaSets out;
  for (std::size_t idx : store.relation_triples(relation)) {
    out.domain.push_back(store.triples()[idx].s);
    out.range.push_back(store.triples()[idx].o);
  }
  for (auto* side : {&out.domain, &out.range}) {
    std::sort(side->begin(), side->end());
    side->erase(std::unique(side->begin(), side->end()), side->end());
  }
  out.empty = out.domain.empty();
  return out;
}

RelationSemantics lcwa_semantics(const TripleStore& train) {
  std::vector<RelationSemantics::Relation> relations;
  relations.reserve(train.num_relations());
  for (RelationId p = 0; p < train.num_relations(); ++p) {
    LcwaSets sets = derive_lcwa(train, p);
    if (sets.empty) log::warn("lcwa: relation {} has no training triples; domain and range are empty", p);
    relations.push_back({std::move(sets.domain), std::move(sets.range), Provenance::lcwa});
  }
  return RelationSemantics(train.num_entities(), std::move(relations));
}

}  // namespace kgtc
