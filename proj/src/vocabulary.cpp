#include "keypos/vocabulary.hpp"

#include "keypos/errors.hpp"
#include "keypos/serial.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace keypos {

namespace {

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + salt + 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

OrbDescriptor majorityCentroid(const std::vector<OrbDescriptor>& corpus,
                               const std::vector<std::uint32_t>& members) {
    std::array<int, kOrbDescriptorBits> ones{};
    for (std::uint32_t m : members) {
        const OrbDescriptor& d = corpus[m];
        for (int b = 0; b < kOrbDescriptorBits; ++b) {
            ones[b] += d.testBit(b) ? 1 : 0;
        }
    }
    OrbDescriptor c;
    const int n = static_cast<int>(members.size());
    for (int b = 0; b < kOrbDescriptorBits; ++b) {
        if (2 * ones[b] > n) c.setBit(b); // exact tie stays 0
    }
    return c;
}

struct Builder {
    const std::vector<OrbDescriptor>& corpus;
    Vocabulary& vocab;
    int branching;
    int maxDepth;

    // Returns the node index for the subtree over `members`.
    std::uint32_t build(std::vector<std::uint32_t> members, int depth, std::uint64_t seed) {
        const std::uint32_t nodeIdx = static_cast<std::uint32_t>(vocab.nodes.size());
        vocab.nodes.emplace_back();
        vocab.nodes[nodeIdx].centroid = majorityCentroid(corpus, members);

        std::vector<std::uint32_t> uniques;
        {
            std::set<OrbDescriptor> seen;
            for (std::uint32_t m : members) {
                if (seen.insert(corpus[m]).second) uniques.push_back(m);
            }
        }
        if (depth == maxDepth || uniques.size() <= 1) {
            vocab.nodes[nodeIdx].wordId = static_cast<std::int32_t>(vocab.wordIdf.size());
            vocab.wordIdf.push_back(0.0); // filled in after training
            return nodeIdx;
        }

        const int k = std::min<int>(branching, static_cast<int>(uniques.size()));

        // Seeded initial centers: partial Fisher-Yates over the unique members.
        std::vector<std::uint32_t> pool = uniques;
        std::vector<OrbDescriptor> centers;
        std::uint64_t state = seed;
        for (int c = 0; c < k; ++c) {
            state = mixSeed(state, c + 1);
            const std::size_t pick = c + state % (pool.size() - c);
            std::swap(pool[c], pool[pick]);
            centers.push_back(corpus[pool[c]]);
        }

        std::vector<int> assignment(members.size(), -1);
        std::vector<std::vector<std::uint32_t>> clusters(k);
        for (int iter = 0; iter < kVocabKmeansIterations; ++iter) {
            bool changed = false;
            for (auto& cl : clusters) cl.clear();
            for (std::size_t i = 0; i < members.size(); ++i) {
                int best = 0;
                int bestDist = orbHamming(corpus[members[i]], centers[0]);
                for (int c = 1; c < k; ++c) {
                    const int d = orbHamming(corpus[members[i]], centers[c]);
                    if (d < bestDist) {
                        bestDist = d;
                        best = c;
                    }
                }
                if (assignment[i] != best) {
                    assignment[i] = best;
                    changed = true;
                }
                clusters[best].push_back(static_cast<std::uint32_t>(i));
            }

            // Refill empty clusters with the farthest member of the largest one.
            for (int c = 0; c < k; ++c) {
                if (!clusters[c].empty()) continue;
                int largest = 0;
                for (int o = 1; o < k; ++o) {
                    if (clusters[o].size() > clusters[largest].size()) largest = o;
                }
                if (clusters[largest].size() <= 1) continue;
                std::size_t farPos = 0;
                int farDist = -1;
                for (std::size_t p = 0; p < clusters[largest].size(); ++p) {
                    const std::uint32_t mi = clusters[largest][p];
                    const int d = orbHamming(corpus[members[mi]], centers[largest]);
                    if (d > farDist) {
                        farDist = d;
                        farPos = p;
                    }
                }
                const std::uint32_t moved = clusters[largest][farPos];
                clusters[largest].erase(clusters[largest].begin() + farPos);
                clusters[c].push_back(moved);
                assignment[moved] = c;
                changed = true;
            }

            for (int c = 0; c < k; ++c) {
                std::vector<std::uint32_t> memberIdx;
                memberIdx.reserve(clusters[c].size());
                for (std::uint32_t mi : clusters[c]) memberIdx.push_back(members[mi]);
                centers[c] = majorityCentroid(corpus, memberIdx);
            }
            if (!changed) break;
        }

        for (int c = 0; c < k; ++c) {
            std::vector<std::uint32_t> childMembers;
            childMembers.reserve(clusters[c].size());
            for (std::uint32_t mi : clusters[c]) childMembers.push_back(members[mi]);
            if (childMembers.empty()) continue;
            const std::uint32_t child =
                build(std::move(childMembers), depth + 1, mixSeed(seed, 1000 + c));
            vocab.nodes[nodeIdx].children.push_back(child);
        }
        return nodeIdx;
    }
};

} // namespace

Vocabulary trainVocabulary(const std::vector<std::vector<OrbDescriptor>>& imageDescriptors,
                           int branching, int depth, std::uint64_t seed) {
    if (branching < 2) throw ConfigError("vocabulary branching must be at least 2");
    if (depth < 1) throw ConfigError("vocabulary depth must be at least 1");

    std::vector<OrbDescriptor> corpus;
    for (const auto& img : imageDescriptors) {
        corpus.insert(corpus.end(), img.begin(), img.end());
    }
    if (corpus.empty()) throw ValidationError("vocabulary training corpus is empty");

    Vocabulary vocab;
    vocab.branching = static_cast<std::uint32_t>(branching);
    vocab.depth = static_cast<std::uint32_t>(depth);
    vocab.trainSeed = seed;
    vocab.patternSeed = kOrbPatternSeed;

    std::vector<std::uint32_t> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    Builder builder{corpus, vocab, branching, depth};
    builder.build(std::move(all), 0, mixSeed(seed, 0));

    // idf over the training images.
    const double imageCount = static_cast<double>(imageDescriptors.size());
    std::vector<int> imagesWithWord(vocab.wordIdf.size(), 0);
    for (const auto& img : imageDescriptors) {
        std::set<int> words;
        for (const OrbDescriptor& d : img) words.insert(quantize(vocab, d));
        for (int w : words) ++imagesWithWord[w];
    }
    for (std::size_t w = 0; w < vocab.wordIdf.size(); ++w) {
        const double idf = std::log(imageCount / (1.0 + imagesWithWord[w]));
        vocab.wordIdf[w] = std::max(0.0, idf);
    }
    return vocab;
}

int quantize(const Vocabulary& vocab, const OrbDescriptor& desc) {
    if (vocab.nodes.empty()) throw ConfigError("vocabulary has no nodes");
    std::uint32_t node = 0;
    while (!vocab.nodes[node].children.empty()) {
        const auto& children = vocab.nodes[node].children;
        std::uint32_t best = children[0];
        int bestDist = orbHamming(desc, vocab.nodes[children[0]].centroid);
        for (std::size_t c = 1; c < children.size(); ++c) {
            const int d = orbHamming(desc, vocab.nodes[children[c]].centroid);
            if (d < bestDist) {
                bestDist = d;
                best = children[c];
            }
        }
        node = best;
    }
    return vocab.nodes[node].wordId;
}

namespace {

constexpr char kVocabMagic[4] = {'K', 'P', 'V', 'C'};
constexpr std::uint32_t kVocabVersion = 1;

} // namespace

void writeVocabulary(const Vocabulary& vocab, std::ostream& out) {
    BinaryWriter w(out);
    w.putMagic(kVocabMagic);
    w.putU32(kVocabVersion);
    w.putU32(vocab.branching);
    w.putU32(vocab.depth);
    w.putU64(vocab.trainSeed);
    w.putU64(vocab.patternSeed);
    w.putU32(static_cast<std::uint32_t>(vocab.nodes.size()));
    w.putU32(static_cast<std::uint32_t>(vocab.wordIdf.size()));
    for (const VocabNode& n : vocab.nodes) {
        for (std::uint64_t word : n.centroid.words) w.putU64(word);
        w.putI32(n.wordId);
        w.putU32(static_cast<std::uint32_t>(n.children.size()));
        for (std::uint32_t c : n.children) w.putU32(c);
    }
    for (double idf : vocab.wordIdf) w.putF64(idf);
}

Vocabulary readVocabulary(std::istream& in) {
    BinaryReader r(in);
    r.expectMagic(kVocabMagic, "vocabulary");
    const std::uint32_t version = r.getU32();
    if (version != kVocabVersion) {
        throw FormatError("unsupported vocabulary file version " + std::to_string(version));
    }
    Vocabulary vocab;
    vocab.branching = r.getU32();
    vocab.depth = r.getU32();
    vocab.trainSeed = r.getU64();
    vocab.patternSeed = r.getU64();
    const std::uint32_t nodeCount = r.getU32();
    const std::uint32_t wordCount = r.getU32();
    vocab.nodes.resize(nodeCount);
    for (VocabNode& n : vocab.nodes) {
        for (std::uint64_t& word : n.centroid.words) word = r.getU64();
        n.wordId = r.getI32();
        const std::uint32_t childCount = r.getU32();
        n.children.resize(childCount);
        for (std::uint32_t& c : n.children) {
            c = r.getU32();
            if (c >= nodeCount) throw FormatError("vocabulary child index out of range");
        }
    }
    vocab.wordIdf.resize(wordCount);
    for (double& idf : vocab.wordIdf) idf = r.getF64();
    return vocab;
}

void saveVocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open vocabulary file for writing: " + path);
    writeVocabulary(vocab, out);
    out.flush();
    if (!out) throw IoError("failed writing vocabulary file: " + path);
}

Vocabulary loadVocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    return readVocabulary(in);
}

std::uint64_t vocabularyHash(const Vocabulary& vocab) {
    std::ostringstream buf(std::ios::binary);
    writeVocabulary(vocab, buf);
    const std::string bytes = buf.str();
    return fnv1a64(bytes.data(), bytes.size());
}

std::string vocabularyToJson(const Vocabulary& vocab) {
    nlohmann::json j;
    j["branching"] = vocab.branching;
    j["depth"] = vocab.depth;
    j["trainSeed"] = vocab.trainSeed;
    j["patternSeed"] = vocab.patternSeed;
    j["wordCount"] = vocab.wordCount();
    nlohmann::json nodes = nlohmann::json::array();
    for (const VocabNode& n : vocab.nodes) {
        nlohmann::json jn;
        jn["centroid"] = n.centroid.words;
        jn["wordId"] = n.wordId;
        jn["children"] = n.children;
        nodes.push_back(jn);
    }
    j["nodes"] = std::move(nodes);
    j["idf"] = vocab.wordIdf;
    return j.dump(2);
}

} // namespace keypos
