#pragma once

#include "keypos/orb.hpp"
#include "keypos/vocabulary.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace keypos {

struct BowEntry {
    std::uint32_t wordId = 0;
    double weight = 0.0; // > 0

    bool operator==(const BowEntry&) const = default;
};

/// Sparse tf-idf vector, entries sorted by word id, L1-normalized when
/// non-empty. Empty means the frame produced no (weighted) local features.
struct BowVector {
    std::vector<BowEntry> entries;

    bool empty() const { return entries.empty(); }
    bool operator==(const BowVector&) const = default;
};

/// Quantize every descriptor, accumulate term frequencies, weight by idf and
/// L1-normalize. All-zero total weight (every word idf-clamped to 0) yields an
/// empty vector.
BowVector bowTransform(const std::vector<OrbDescriptor>& descriptors, const Vocabulary& vocab);

/// L1-score s = 1 - 0.5 * sum |a_w - b_w| over the union of supports, in [0,1]
/// for normalized inputs; s(v, v) = 1.
double bowScore(const BowVector& a, const BowVector& b);

struct Posting {
    std::uint32_t frameIndex = 0;
    double weight = 0.0;
};

/// word id -> postings (frame ascending), exactly the nonzero entries.
struct InverseIndex {
    std::vector<std::vector<Posting>> postings;

    int wordCount() const { return static_cast<int>(postings.size()); }
};

InverseIndex buildInverseIndex(const std::vector<BowVector>& vectors, int wordCount);

/// kNN over the index: postings of the query's words select the frames that
/// share at least one word (others score 0 and are never returned); each
/// selected frame in `candidates` is then scored with the full L1 formula
/// against its stored vector, so results match brute-force scoring exactly.
/// Sorted score descending, ties by ascending frame index; empty query or
/// empty candidate set gives an empty result.
std::vector<std::pair<std::uint32_t, double>> inverseIndexQuery(
    const InverseIndex& index, const std::vector<BowVector>& vectors, const BowVector& query,
    int kBow, const std::vector<std::uint32_t>& candidates);

} // namespace keypos
