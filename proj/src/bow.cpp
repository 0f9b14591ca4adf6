#include "keypos/bow.hpp"

#include "keypos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace keypos {

BowVector bowTransform(const std::vector<OrbDescriptor>& descriptors, const Vocabulary& vocab) {
    BowVector v;
    if (descriptors.empty()) return v;

    std::map<int, int> counts;
    for (const OrbDescriptor& d : descriptors) ++counts[quantize(vocab, d)];

    double total = 0.0;
    for (const auto& [word, count] : counts) {
        total += count * vocab.wordIdf[word];
    }
    if (total <= 0.0) return v;

    v.entries.reserve(counts.size());
    for (const auto& [word, count] : counts) {
        const double weight = count * vocab.wordIdf[word] / total;
        if (weight > 0.0) {
            v.entries.push_back({static_cast<std::uint32_t>(word), weight});
        }
    }
    return v;
}

double bowScore(const BowVector& a, const BowVector& b) {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].wordId == b.entries[j].wordId) {
            sum += std::abs(a.entries[i].weight - b.entries[j].weight);
            ++i;
            ++j;
        } else if (a.entries[i].wordId < b.entries[j].wordId) {
            sum += a.entries[i].weight;
            ++i;
        } else {
            sum += b.entries[j].weight;
            ++j;
        }
    }
    for (; i < a.entries.size(); ++i) sum += a.entries[i].weight;
    for (; j < b.entries.size(); ++j) sum += b.entries[j].weight;
    return std::clamp(1.0 - 0.5 * sum, 0.0, 1.0);
}

InverseIndex buildInverseIndex(const std::vector<BowVector>& vectors, int wordCount) {
    InverseIndex index;
    index.postings.resize(wordCount);
    for (std::size_t f = 0; f < vectors.size(); ++f) {
        for (const BowEntry& e : vectors[f].entries) {
            if (e.wordId >= index.postings.size()) {
                throw ConfigError("bow entry references a word outside the vocabulary");
            }
            index.postings[e.wordId].push_back({static_cast<std::uint32_t>(f), e.weight});
        }
    }
    return index;
}

std::vector<std::pair<std::uint32_t, double>> inverseIndexQuery(
    const InverseIndex& index, const std::vector<BowVector>& vectors, const BowVector& query,
    int kBow, const std::vector<std::uint32_t>& candidates) {
    std::vector<std::pair<std::uint32_t, double>> result;
    if (kBow <= 0 || query.empty() || candidates.empty()) return result;

    std::vector<bool> allowed(vectors.size(), false);
    for (std::uint32_t c : candidates) {
        if (c < vectors.size()) allowed[c] = true;
    }

    // Frames sharing at least one word, via the postings.
    std::vector<std::uint32_t> sharing;
    std::vector<bool> seen(vectors.size(), false);
    for (const BowEntry& e : query.entries) {
        if (e.wordId >= index.postings.size()) continue;
        for (const Posting& p : index.postings[e.wordId]) {
            if (allowed[p.frameIndex] && !seen[p.frameIndex]) {
                seen[p.frameIndex] = true;
                sharing.push_back(p.frameIndex);
            }
        }
    }

    result.reserve(sharing.size());
    for (std::uint32_t f : sharing) {
        result.emplace_back(f, bowScore(query, vectors[f]));
    }
    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (result.size() > static_cast<std::size_t>(kBow)) result.resize(kBow);
    return result;
}

} // namespace keypos
