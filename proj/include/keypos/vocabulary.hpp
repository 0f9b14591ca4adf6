#pragma once

#include "keypos/orb.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace keypos {

inline constexpr int kVocabBranching = 9;
inline constexpr int kVocabDepth = 3;
inline constexpr int kVocabKmeansIterations = 20;

struct VocabNode {
    OrbDescriptor centroid;
    std::vector<std::uint32_t> children; // empty for leaves
    std::int32_t wordId = -1;            // >= 0 only for leaves
};

struct Vocabulary {
    std::uint32_t branching = kVocabBranching;
    std::uint32_t depth = kVocabDepth;
    std::uint64_t trainSeed = 0;
    std::uint64_t patternSeed = kOrbPatternSeed;
    std::vector<VocabNode> nodes; // nodes[0] is the root
    std::vector<double> wordIdf;  // indexed by wordId

    int wordCount() const { return static_cast<int>(wordIdf.size()); }
};

/// Recursive k-majority clustering over per-image descriptor sets: centroids
/// are per-bit majorities, assignment is by Hamming distance (ties to the
/// lowest center index), iteration capped, initial centers seeded. Leaves get
/// word ids in depth-first order. idf(word) = max(0, ln(N / (1 + n_w))) with
/// N the image count and n_w the number of images containing the word.
Vocabulary trainVocabulary(const std::vector<std::vector<OrbDescriptor>>& imageDescriptors,
                           int branching = kVocabBranching, int depth = kVocabDepth,
                           std::uint64_t seed = 0);

/// Tree descent by nearest-centroid Hamming at every level; returns the word id.
int quantize(const Vocabulary& vocab, const OrbDescriptor& desc);

void saveVocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary loadVocabulary(const std::string& path);
void writeVocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary readVocabulary(std::istream& in);

/// FNV-1a over the serialized payload; stored in database files so a database
/// can verify it carries the vocabulary it was built with.
std::uint64_t vocabularyHash(const Vocabulary& vocab);

std::string vocabularyToJson(const Vocabulary& vocab);

} // namespace keypos
