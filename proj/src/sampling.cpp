#include "kgtc/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "kgtc/error.hpp"
#include "kgtc/log.hpp"

namespace kgtc {
namespace {

// Stream ids for derive_rng; fixed so persisted splits stay reproducible.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kProbeStream = 2;
constexpr std::uint64_t kHoldoutNegStream = 3;
constexpr std::uint64_t kValidationNegStream = 4;
constexpr std::uint64_t kProbeNegStream = 5;

// Block sizes above this are never enumerated; rejection sampling is then
// the only route.
constexpr std::uint64_t kMaxEnumeratedBlock = std::uint64_t{1} << 24;

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace

SplitSizes split_sizes(std::size_t num_triples) {
  SplitSizes sizes;
  sizes.holdout = num_triples / 5;
  sizes.validation = num_triples / 10;
  sizes.train = num_triples - sizes.holdout - sizes.validation;
  sizes.probe = (sizes.train + 19) / 20;
  return sizes;
}

SplitBundle partition_positives(const TripleStore& store, std::uint64_t seed) {
  if (store.empty()) throw InputError("cannot split an empty triple store");
  std::vector<Triple> shuffled = store.triples();
  Rng rng = derive_rng(seed, kShuffleStream);
  shuffle(shuffled, rng);

  const SplitSizes sizes = split_sizes(shuffled.size());
  SplitBundle bundle;
  bundle.split_seed = seed;
  auto first = shuffled.begin();
  bundle.holdout.assign(first, first + sizes.holdout);
  first += sizes.holdout;
  bundle.validation.assign(first, first + sizes.validation);
  first += sizes.validation;
  bundle.train.assign(first, shuffled.end());

  std::vector<std::size_t> order(bundle.train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng probe_rng = derive_rng(seed, kProbeStream);
  shuffle(order, probe_rng);
  order.resize(sizes.probe);
  std::sort(order.begin(), order.end());
  for (std::size_t i : order) bundle.early_stop_probe.push_back(bundle.train[i]);

  std::vector<std::size_t> train_per_relation(store.num_relations(), 0);
  for (const Triple& t : bundle.train) ++train_per_relation[t.p];
  for (RelationId p = 0; p < store.num_relations(); ++p) {
    if (train_per_relation[p] == 0 && !store.relation_triples(p).empty()) {
      log::warn("split: relation {} has no triples in the training split", p);
    }
  }
  return bundle;
}

void attach_negatives(SplitBundle& bundle, const TripleStore& store,
                      const RelationSemantics& semantics) {
  TripleSet forbidden(store.triples().begin(), store.triples().end());
  auto draw = [&](const std::vector<Triple>& positives, std::uint64_t stream) {
    NegativeSample sample = sample_negatives(positives, semantics, kNegativesPerPositive, forbidden,
                                             bundle.split_seed ^ (stream << 56));
    bundle.negative_shortfall += sample.shortfall;
    return std::move(sample.triples);
  };
  bundle.negative_shortfall = 0;
  bundle.holdout_negatives = draw(bundle.holdout, kHoldoutNegStream);
  bundle.validation_negatives = draw(bundle.validation, kValidationNegStream);
  bundle.probe_negatives = draw(bundle.early_stop_probe, kProbeNegStream);
}

SplitBundle split_dataset(const TripleStore& store, const RelationSemantics& semantics,
                          std::uint64_t seed) {
  SplitBundle bundle = partition_positives(store, seed);
  attach_negatives(bundle, store, semantics);
  return bundle;
}

TripleStore store_of(std::span<const Triple> triples, std::size_t num_entities,
                     std::size_t num_relations) {
  return TripleStore(num_entities, num_relations, triples);
}

NegativeSample sample_negatives(std::span<const Triple> positives, const RelationSemantics& semantics,
                                std::size_t count_per_positive, TripleSet& forbidden,
                                std::uint64_t seed) {
  if (count_per_positive < 1) throw std::invalid_argument("count_per_positive must be >= 1");
  Rng rng(seed);
  NegativeSample out;
  out.triples.reserve(positives.size() * count_per_positive);

  for (const Triple& pos : positives) {
    const auto& dom = semantics.domain(pos.p);
    const auto& rng_set = semantics.range(pos.p);
    const std::uint64_t block = std::uint64_t{dom.size()} * rng_set.size();
    if (block == 0) {
      out.shortfall += count_per_positive;
      continue;
    }

    std::size_t emitted = 0;
    const std::size_t max_attempts = std::max<std::size_t>(64, 8 * count_per_positive);
    for (std::size_t attempt = 0; attempt < max_attempts && emitted < count_per_positive; ++attempt) {
      const Triple cand{dom[uniform_index(rng, dom.size())], pos.p,
                        rng_set[uniform_index(rng, rng_set.size())]};
      if (forbidden.insert(cand).second) {
        out.triples.push_back(cand);
        ++emitted;
      }
    }
    if (emitted == count_per_positive) continue;

    // Rejection kept failing: the free part of the block is small, so list it.
    std::vector<Triple> free;
    if (block <= kMaxEnumeratedBlock) {
      for (EntityId s : dom) {
        for (EntityId o : rng_set) {
          const Triple cand{s, pos.p, o};
          if (!forbidden.count(cand)) free.push_back(cand);
        }
      }
    }
    const std::size_t needed = count_per_positive - emitted;
    const std::size_t take = std::min(needed, free.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(free[i], free[i + uniform_index(rng, free.size() - i)]);
      forbidden.insert(free[i]);
      out.triples.push_back(free[i]);
    }
    out.shortfall += needed - take;
  }
  if (out.shortfall > 0) {
    log::warn("negative sampling: {} of {} requested negatives unavailable under the constraints",
              out.shortfall, positives.size() * count_per_positive);
  }
  return out;
}

CorruptionBatch corrupt_for_training(std::span<const Triple> batch, const RelationSemantics& semantics,
                                     CorruptionMode mode, std::size_t count, Rng& rng) {
  CorruptionBatch out;
  const std::size_t per_side = count;
  out.items.reserve(batch.size() * per_side * (mode == CorruptionMode::subject_and_object ? 2 : 1));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triple& pos = batch[i];
    if (mode == CorruptionMode::subject_and_object) {
      const auto& dom = semantics.domain(pos.p);
      for (std::size_t k = 0; k < per_side; ++k) {
        if (dom.empty()) {
          ++out.skipped;
          continue;
        }
        out.items.push_back({i, {dom[uniform_index(rng, dom.size())], pos.p, pos.o}, CorruptedSide::subject});
      }
    }
    const auto& rng_set = semantics.range(pos.p);
    for (std::size_t k = 0; k < per_side; ++k) {
      if (rng_set.empty()) {
        ++out.skipped;
        continue;
      }
      out.items.push_back(
          {i, {pos.s, pos.p, rng_set[uniform_index(rng, rng_set.size())]}, CorruptedSide::object});
    }
  }
  if (out.skipped > 0) log::debug("training corruption: skipped {} slots with empty pools", out.skipped);
  return out;
}

}  // namespace kgtc
