#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kgtc/graph.hpp"
#include "kgtc/random.hpp"

namespace kgtc {

/// Negatives drawn per evaluation positive.
inline constexpr std::size_t kNegativesPerPositive = 10;

/// Train/validation/holdout partition of the observed triples, the
/// early-stopping probe drawn from train, and pairwise disjoint negative pools.
struct SplitBundle {
  std::vector<Triple> train;
  std::vector<Triple> validation;
  std::vector<Triple> holdout;
  std::vector<Triple> early_stop_probe;
  std::vector<Triple> validation_negatives;
  std::vector<Triple> holdout_negatives;
  std::vector<Triple> probe_negatives;
  std::uint64_t split_seed = 0;
  std::size_t negative_shortfall = 0;

  friend bool operator==(const SplitBundle&, const SplitBundle&) = default;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t holdout = 0;
  std::size_t probe = 0;
};

/// holdout = floor(0.2 N), validation = floor(0.1 N), train = the rest,
/// probe = ceil(0.05 |train|).
SplitSizes split_sizes(std::size_t num_triples);

/// Shuffles the positives under `seed` and fills the positive fields of a
/// bundle. Negative pools are left empty.
SplitBundle partition_positives(const TripleStore& store, std::uint64_t seed);

/// Draws the holdout, validation and probe negative pools (in that order)
/// under `semantics`, excluding every triple of `store` and each other.
void attach_negatives(SplitBundle& bundle, const TripleStore& store, const RelationSemantics& semantics);

/// partition_positives followed by attach_negatives.
SplitBundle split_dataset(const TripleStore& store, const RelationSemantics& semantics,
                          std::uint64_t seed);

/// Training triples as a store over the same entity/relation universe.
TripleStore store_of(std::span<const Triple> triples, std::size_t num_entities,
                     std::size_t num_relations);

struct NegativeSample {
  std::vector<Triple> triples;
  std::size_t shortfall = 0;
};

/// For each positive (s, p, o), up to `count_per_positive` triples (s', p, o')
/// with s' in domain_p and o' in range_p that are not in `forbidden`. Every
/// emitted triple is added to `forbidden`. When the admissible pool runs dry
/// the remainder is reported as shortfall.
NegativeSample sample_negatives(std::span<const Triple> positives, const RelationSemantics& semantics,
                                std::size_t count_per_positive, TripleSet& forbidden,
                                std::uint64_t seed);

enum class CorruptionMode { subject_and_object, object_only };
enum class CorruptedSide { subject, object };

struct Corruption {
  std::size_t positive = 0;  ///< index into the batch
  Triple triple;
  CorruptedSide side = CorruptedSide::object;
};

struct CorruptionBatch {
  std::vector<Corruption> items;
  std::size_t skipped = 0;
};

/// Training corruptions. subject_and_object draws `count` subjects from
/// domain_p and `count` objects from range_p per positive; object_only draws
/// `count` objects. Draws are uniform and may hit observed triples.
CorruptionBatch corrupt_for_training(std::span<const Triple> batch, const RelationSemantics& semantics,
                                     CorruptionMode mode, std::size_t count, Rng& rng);

}  // namespace kgtc
