#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgtc {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

/// Dense label <-> id dictionaries for entities and relations. Ids are
/// handed out in order of first appearance.
class Vocabulary {
 public:
  EntityId add_entity(std::string_view label);
  RelationId add_relation(std::string_view label);

  /// Returns the id, or throws InputError for an unknown label.
  EntityId entity_id(std::string_view label) const;
  RelationId relation_id(std::string_view label) const;
  bool has_entity(std::string_view label) const;
  bool has_relation(std::string_view label) const;

  const std::string& entity_label(EntityId id) const { return entity_labels_.at(id); }
  const std::string& relation_label(RelationId id) const { return relation_labels_.at(id); }

  std::size_t num_entities() const { return entity_labels_.size(); }
  std::size_t num_relations() const { return relation_labels_.size(); }
  const std::vector<std::string>& entity_labels() const { return entity_labels_; }
  const std::vector<std::string>& relation_labels() const { return relation_labels_; }

 private:
  std::vector<std::string> entity_labels_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

struct Triple {
  EntityId s = 0;
  RelationId p = 0;
  EntityId o = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple& a, const Triple& b) {
    if (auto c = a.p <=> b.p; c != 0) return c;
    if (auto c = a.s <=> b.s; c != 0) return c;
    return a.o <=> b.o;
  }
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (std::uint64_t v : {std::uint64_t{t.s}, std::uint64_t{t.p}, std::uint64_t{t.o}}) {
      h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

/// Deduplicated fact set with per-relation and per-entity indices. Triples
/// keep their first-insertion order.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(std::size_t num_entities, std::size_t num_relations);
  TripleStore(std::size_t num_entities, std::size_t num_relations, std::span<const Triple> triples);

  /// Inserts unless present; returns false for duplicates. Throws
  /// std::out_of_range for ids outside the store's shape.
  bool insert(const Triple& t);
  bool contains(const Triple& t) const { return members_.count(t) != 0; }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return by_relation_.size(); }

  const std::vector<Triple>& triples() const { return triples_; }
  /// Indices into triples() of every fact with predicate `p`.
  const std::vector<std::size_t>& relation_triples(RelationId p) const { return by_relation_.at(p); }
  std::size_t incidence(EntityId e) const { return incidence_.at(e); }

 private:
  std::size_t num_entities_ = 0;
  std::vector<Triple> triples_;
  TripleSet members_;
  std::vector<std::vector<std::size_t>> by_relation_;
  std::vector<std::size_t> incidence_;
};

struct LoadedGraph {
  Vocabulary vocab;
  TripleStore store;
  std::size_t duplicates_dropped = 0;
};

/// One parsed line of a triples file; `line` is 1-based and used in errors.
struct TripleRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Builds the vocabulary and deduplicated store. Throws InputError naming the
/// line for records without exactly three non-empty fields.
LoadedGraph load_graph(std::span<const TripleRecord> records);

/// Entity id -> class labels. Entities absent from the map are untyped.
using TypeAssignment = std::map<EntityId, std::set<std::string>>;

struct ConstraintDeclaration {
  std::vector<std::string> domain_classes;
  std::vector<std::string> range_classes;
};

/// Declarations keyed by relation id.
using ConstraintDeclarations = std::map<RelationId, ConstraintDeclaration>;

enum class Provenance { unconstrained, schema, lcwa };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Admissible subjects (domain) and objects (range) of every relation, kept
/// as ascending id lists plus membership masks.
class RelationSemantics {
 public:
  struct Relation {
    std::vector<EntityId> domain;
    std::vector<EntityId> range;
    Provenance provenance = Provenance::unconstrained;
  };

  RelationSemantics() = default;
  RelationSemantics(std::size_t num_entities, std::vector<Relation> relations);

  /// Every relation admits every entity on both sides.
  static RelationSemantics unconstrained(std::size_t num_entities, std::size_t num_relations);

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return relations_.size(); }

  const std::vector<EntityId>& domain(RelationId p) const { return relations_.at(p).domain; }
  const std::vector<EntityId>& range(RelationId p) const { return relations_.at(p).range; }
  Provenance provenance(RelationId p) const { return relations_.at(p).provenance; }
  const Relation& relation(RelationId p) const { return relations_.at(p); }

  bool in_domain(RelationId p, EntityId e) const { return domain_mask_.at(p)[e] != 0; }
  bool in_range(RelationId p, EntityId e) const { return range_mask_.at(p)[e] != 0; }
  bool admits(const Triple& t) const { return in_domain(t.p, t.s) && in_range(t.p, t.o); }

  /// The regime shared by all relations, with unconstrained relations not
  /// counting against schema or lcwa.
  Provenance dominant_provenance() const;

 private:
  std::size_t num_entities_ = 0;
  std::vector<Relation> relations_;
  std::vector<std::vector<std::uint8_t>> domain_mask_;
  std::vector<std::vector<std::uint8_t>> range_mask_;
};

/// Domain/range from schema class declarations. Relations without a
/// declaration are unconstrained. Entities observed as subject/object of a
/// relation in `store` are added to its domain/range so that no input triple
/// violates the result.
RelationSemantics resolve_schema_constraints(const Vocabulary& vocab, const TripleStore& store,
                                             const TypeAssignment& types,
                                             const ConstraintDeclarations& declarations);

struct LcwaSets {
  std::vector<EntityId> domain;
  std::vector<EntityId> range;
  bool empty = false;  ///< relation had no triples in the supplied store
};

/// Domain = subjects and range = objects of `relation` in `store`, which
/// should be the training split.
LcwaSets derive_lcwa(const TripleStore& store, RelationId relation);

/// derive_lcwa for every relation, packaged as semantics with lcwa provenance.
RelationSemantics lcwa_semantics(const TripleStore& train);

}  // namespace kgtc
