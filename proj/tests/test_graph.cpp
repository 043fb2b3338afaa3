#include <doctest.h>

#include <string>
#include <vector>

#include "kgtc/error.hpp"
#include "kgtc/graph.hpp"
#include "oracles.hpp"

using namespace kgtc;

namespace {

std::vector<TripleRecord> records(std::initializer_list<std::vector<std::string>> rows) {
  std::vector<TripleRecord> out;
  std::size_t line = 1;
  for (const auto& r : rows) out.push_back({line++, r});
  return out;
}

std::vector<EntityId> ids(const Vocabulary& v, std::initializer_list<const char*> labels) {
  std::vector<EntityId> out;
  for (const char* l : labels) out.push_back(v.entity_id(l));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("load_graph drops duplicates") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"A", "p", "B"}}));
  CHECK(g.store.size() == 1);
  CHECK(g.vocab.num_entities() == 2);
  CHECK(g.vocab.num_relations() == 1);
  CHECK(g.duplicates_dropped == 1);
}

TEST_CASE("load_graph assigns ids in first-appearance order") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"B", "q", "A"}}));
  CHECK(g.store.size() == 2);
  CHECK(g.vocab.num_entities() == 2);
  CHECK(g.vocab.num_relations() == 2);
  CHECK(g.vocab.entity_id("A") == 0);
  CHECK(g.vocab.entity_id("B") == 1);
  CHECK(g.vocab.relation_label(1) == "q");
  CHECK(g.store.contains({1, 1, 0}));
}

TEST_CASE("load_graph rejects malformed records with the line number") {
  auto bad = records({{"A", "p", "B"}, {"A", "p"}});
  bad[1].line = 7;
  try {
    load_graph(bad);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
  CHECK_THROWS_AS(load_graph(records({{"A", "", "B"}})), InputError);
  CHECK_THROWS_AS(load_graph(std::vector<TripleRecord>{}), InputError);
}

TEST_CASE("vocabulary lookups") {
  Vocabulary v;
  CHECK(v.add_entity("x") == 0);
  CHECK(v.add_entity("y") == 1);
  CHECK(v.add_entity("x") == 0);
  CHECK(v.has_entity("y"));
  CHECK_FALSE(v.has_entity("z"));
  CHECK_THROWS_AS(v.entity_id("z"), InputError);
}

TEST_CASE("triple store indices") {
  TripleStore s(3, 2);
  CHECK(s.insert({0, 1, 2}));
  CHECK_FALSE(s.insert({0, 1, 2}));
  CHECK(s.insert({2, 0, 2}));
  CHECK(s.relation_triples(1).size() == 1);
  CHECK(s.incidence(2) == 2);
  CHECK_THROWS_AS(s.insert({3, 0, 0}), std::out_of_range);
}

TEST_CASE("schema constraints from class declarations") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"A", "q", "B"}}));
  TypeAssignment types{{g.vocab.entity_id("A"), {"Person"}}, {g.vocab.entity_id("B"), {"City"}}};
  ConstraintDeclarations decls{{g.vocab.relation_id("p"), {{"Person"}, {"City"}}}};
  const auto sem = resolve_schema_constraints(g.vocab, g.store, types, decls);
  const RelationId p = g.vocab.relation_id("p"), q = g.vocab.relation_id("q");
  CHECK(sem.domain(p) == ids(g.vocab, {"A"}));
  CHECK(sem.range(p) == ids(g.vocab, {"B"}));
  CHECK(sem.provenance(p) == Provenance::schema);
  CHECK(sem.domain(q).size() == 2);
  CHECK(sem.range(q).size() == 2);
  CHECK(sem.provenance(q) == Provenance::unconstrained);
}

TEST_CASE("schema constraints are repaired with violating observations") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"B", "p", "A"}}));
  TypeAssignment types{{g.vocab.entity_id("A"), {"Person"}}, {g.vocab.entity_id("B"), {"City"}}};
  ConstraintDeclarations decls{{g.vocab.relation_id("p"), {{"Person"}, {"City"}}}};
  const auto sem = resolve_schema_constraints(g.vocab, g.store, types, decls);
  CHECK(sem.domain(0) == ids(g.vocab, {"A", "B"}));
  CHECK(sem.range(0) == ids(g.vocab, {"A", "B"}));
}

TEST_CASE("unknown classes match nothing") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"C", "q", "C"}}));
  ConstraintDeclarations decls{{g.vocab.relation_id("q"), {{"Ghost"}, {"Ghost"}}}};
  const auto sem = resolve_schema_constraints(g.vocab, g.store, {}, decls);
  CHECK(sem.domain(1) == ids(g.vocab, {"C"}));
  CHECK(sem.range(1) == ids(g.vocab, {"C"}));
}

TEST_CASE("lcwa derives observed subjects and objects") {
  const auto g = load_graph(records({{"A", "p", "B"}, {"C", "p", "B"}, {"D", "r", "D"}, {"A", "q", "A"}}));
  const auto p = derive_lcwa(g.store, g.vocab.relation_id("p"));
  CHECK(p.domain == ids(g.vocab, {"A", "C"}));
  CHECK(p.range == ids(g.vocab, {"B"}));
  CHECK_FALSE(p.empty);
  const auto q = derive_lcwa(g.store, g.vocab.relation_id("q"));
  CHECK(q.domain == ids(g.vocab, {"A"}));
  CHECK(q.range == ids(g.vocab, {"A"}));

  TripleStore sparse(2, 2);
  sparse.insert({0, 0, 1});
  const auto empty = derive_lcwa(sparse, 1);
  CHECK(empty.domain.empty());
  CHECK(empty.range.empty());
  CHECK(empty.empty);
  CHECK(lcwa_semantics(sparse).provenance(0) == Provenance::lcwa);
}

TEST_CASE("every input triple satisfies its derived semantics") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto store = oracle::random_store(12, 3, 30, rng);
    const auto lcwa = lcwa_semantics(store);
    Vocabulary vocab;
    for (int e = 0; e < 12; ++e) vocab.add_entity("e" + std::to_string(e));
    for (int r = 0; r < 3; ++r) vocab.add_relation("r" + std::to_string(r));
    TypeAssignment types;
    for (EntityId e = 0; e < 12; ++e) types[e] = {e % 2 ? "Odd" : "Even"};
    ConstraintDeclarations decls{{0, {{"Odd"}, {"Even"}}}, {2, {{"Even"}, {"Odd", "Even"}}}};
    const auto schema = resolve_schema_constraints(vocab, store, types, decls);
    for (const auto& t : store.triples()) {
      CHECK(lcwa.admits(t));
      CHECK(schema.admits(t));
    }
  }
}

TEST_CASE("provenance names round trip") {
  for (auto p : {Provenance::unconstrained, Provenance::schema, Provenance::lcwa}) {
    CHECK(provenance_from_string(to_string(p)) == p);
  }
  CHECK(provenance_from_string("unconstrained") == Provenance::unconstrained);
  CHECK_THROWS(provenance_from_string("open"));
}

TEST_CASE("unconstrained semantics admit everything") {
  const auto sem = RelationSemantics::unconstrained(4, 2);
  CHECK(sem.domain(1).size() == 4);
  CHECK(sem.admits({3, 1, 0}));
  CHECK(sem.dominant_provenance() == Provenance::unconstrained);
}
