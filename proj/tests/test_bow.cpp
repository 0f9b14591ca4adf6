#include "keypos/bow.hpp"
#include "keypos/vocabulary.hpp"

#include "keypos/errors.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

using keypos::BowVector;
using keypos::OrbDescriptor;
using keypos::Vocabulary;

namespace {

std::vector<std::vector<OrbDescriptor>> randomCorpus(int images, int perImage,
                                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<OrbDescriptor>> corpus(images);
    for (auto& img : corpus) img = fixtures::randomDescriptors(perImage, rng);
    return corpus;
}

OrbDescriptor allZeros() { return OrbDescriptor{}; }

OrbDescriptor allOnes() {
    OrbDescriptor d;
    for (auto& w : d.words) w = ~std::uint64_t{0};
    return d;
}

bool sameNodes(const Vocabulary& a, const Vocabulary& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i].centroid != b.nodes[i].centroid) return false;
        if (a.nodes[i].children != b.nodes[i].children) return false;
        if (a.nodes[i].wordId != b.nodes[i].wordId) return false;
    }
    return true;
}

BowVector makeBow(std::vector<keypos::BowEntry> entries) {
    BowVector v;
    v.entries = std::move(entries);
    return v;
}

BowVector randomBow(int wordCount, std::mt19937_64& rng) {
    const int support = 1 + static_cast<int>(rng() % 5);
    std::set<std::uint32_t> words;
    while (static_cast<int>(words.size()) < support) {
        words.insert(static_cast<std::uint32_t>(rng() % wordCount));
    }
    std::vector<double> raw;
    double total = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        raw.push_back(1.0 + static_cast<double>(rng() % 100));
        total += raw.back();
    }
    BowVector v;
    std::size_t i = 0;
    for (std::uint32_t w : words) v.entries.push_back({w, raw[i++] / total});
    return v;
}

std::filesystem::path tempDir() {
    const auto dir = std::filesystem::temp_directory_path() / "keypos-bow-tests";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("vocab") {

TEST_CASE("training is deterministic for a fixed seed") {
    const auto corpus = randomCorpus(12, 30, 11);
    const Vocabulary a = keypos::trainVocabulary(corpus, 9, 3, 5);
    const Vocabulary b = keypos::trainVocabulary(corpus, 9, 3, 5);
    CHECK(sameNodes(a, b));
    CHECK(a.wordIdf == b.wordIdf);
    CHECK(keypos::vocabularyHash(a) == keypos::vocabularyHash(b));

    const Vocabulary c = keypos::trainVocabulary(corpus, 9, 3, 6);
    CHECK(keypos::vocabularyHash(a) != keypos::vocabularyHash(c));
}

TEST_CASE("the tree respects branching and depth bounds") {
    const auto corpus = randomCorpus(10, 80, 13);
    const Vocabulary vocab = keypos::trainVocabulary(corpus, 9, 3, 1);
    CHECK(vocab.wordCount() > 1);
    CHECK(vocab.wordCount() <= 9 * 9 * 9);
    for (const auto& n : vocab.nodes) {
        CHECK(n.children.size() <= 9);
        if (n.children.empty()) {
            CHECK(n.wordId >= 0);
            CHECK(n.wordId < vocab.wordCount());
        } else {
            CHECK(n.wordId == -1);
        }
    }
}

TEST_CASE("leaf word ids follow depth-first order") {
    const Vocabulary& vocab = fixtures::sharedVocabulary();
    std::vector<std::uint32_t> stack = {0};
    std::int32_t expected = 0;
    while (!stack.empty()) {
        const std::uint32_t node = stack.back();
        stack.pop_back();
        const auto& children = vocab.nodes[node].children;
        if (children.empty()) {
            CHECK(vocab.nodes[node].wordId == expected);
            ++expected;
        } else {
            for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
        }
    }
    CHECK(expected == vocab.wordCount());
}

TEST_CASE("a corpus with one unique descriptor collapses to one word") {
    const OrbDescriptor a = allOnes();
    const Vocabulary vocab = keypos::trainVocabulary({{a}, {a}}, 9, 3, 0);
    CHECK(vocab.nodes.size() == 1);
    CHECK(vocab.nodes[0].children.empty());
    CHECK(vocab.wordCount() == 1);
    // Present in every training image, so the idf clamps to zero and the
    // transform of any frame is empty.
    CHECK(vocab.wordIdf[0] == 0.0);
    CHECK(keypos::bowTransform({a}, vocab).empty());
}

TEST_CASE("two well-separated descriptors become two words") {
    const OrbDescriptor a = allZeros();
    const OrbDescriptor b = allOnes();
    const Vocabulary vocab = keypos::trainVocabulary({{a}, {a}, {b}, {b}}, 9, 3, 0);
    REQUIRE(vocab.wordCount() == 2);
    CHECK(keypos::quantize(vocab, a) != keypos::quantize(vocab, b));
    const double expectedIdf = std::log(4.0 / 3.0);
    CHECK(vocab.wordIdf[0] == doctest::Approx(expectedIdf).epsilon(1e-12));
    CHECK(vocab.wordIdf[1] == doctest::Approx(expectedIdf).epsilon(1e-12));
}

TEST_CASE("quantize matches an independent tree descent") {
    const Vocabulary& vocab = fixtures::sharedVocabulary();
    std::mt19937_64 rng(17);
    const auto probes = fixtures::randomDescriptors(100, rng);
    for (const OrbDescriptor& d : probes) {
        std::uint32_t node = 0;
        while (!vocab.nodes[node].children.empty()) {
            std::uint32_t best = vocab.nodes[node].children[0];
            int bestDist = oracle::hammingOrb(d, vocab.nodes[best].centroid);
            for (std::uint32_t c : vocab.nodes[node].children) {
                const int dist = oracle::hammingOrb(d, vocab.nodes[c].centroid);
                if (dist < bestDist) {
                    bestDist = dist;
                    best = c;
                }
            }
            node = best;
        }
        CHECK(keypos::quantize(vocab, d) == vocab.nodes[node].wordId);
    }
}

TEST_CASE("idf values stay within the image-count bound") {
    const Vocabulary& vocab = fixtures::sharedVocabulary();
    const double hi = std::log(142.0);
    for (double idf : vocab.wordIdf) {
        CHECK(idf >= 0.0);
        CHECK(idf <= hi);
    }
}

TEST_CASE("training rejects degenerate inputs") {
    CHECK_THROWS_AS(keypos::trainVocabulary({}, 9, 3, 0), keypos::ValidationError);
    CHECK_THROWS_AS(keypos::trainVocabulary({{allZeros()}}, 1, 3, 0), keypos::ConfigError);
    CHECK_THROWS_AS(keypos::trainVocabulary({{allZeros()}}, 9, 0, 0), keypos::ConfigError);
}

TEST_CASE("save and load round-trip every field") {
    const auto corpus = randomCorpus(8, 25, 19);
    const Vocabulary vocab = keypos::trainVocabulary(corpus, 9, 2, 3);
    const auto path = (tempDir() / "roundtrip.kpvc").string();
    keypos::saveVocabulary(vocab, path);
    const Vocabulary back = keypos::loadVocabulary(path);
    CHECK(back.branching == vocab.branching);
    CHECK(back.depth == vocab.depth);
    CHECK(back.trainSeed == vocab.trainSeed);
    CHECK(back.patternSeed == keypos::kOrbPatternSeed);
    CHECK(sameNodes(back, vocab));
    CHECK(back.wordIdf == vocab.wordIdf);
    CHECK(keypos::vocabularyHash(back) == keypos::vocabularyHash(vocab));
}

TEST_CASE("corrupt or truncated files are rejected") {
    const auto corpus = randomCorpus(4, 10, 23);
    const Vocabulary vocab = keypos::trainVocabulary(corpus, 9, 2, 3);
    const auto dir = tempDir();
    const auto good = (dir / "good.kpvc").string();
    keypos::saveVocabulary(vocab, good);

    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    REQUIRE(bytes.size() > 16);

    const auto badMagic = (dir / "badmagic.kpvc").string();
    {
        std::string copy = bytes;
        copy[0] = 'X';
        std::ofstream out(badMagic, std::ios::binary);
        out.write(copy.data(), static_cast<std::streamsize>(copy.size()));
    }
    CHECK_THROWS_AS(keypos::loadVocabulary(badMagic), keypos::FormatError);

    const auto truncated = (dir / "truncated.kpvc").string();
    {
        std::ofstream out(truncated, std::ios::binary);
        out.write(bytes.data(), 10);
    }
    CHECK_THROWS_AS(keypos::loadVocabulary(truncated), keypos::FormatError);

    CHECK_THROWS_AS(keypos::loadVocabulary((dir / "missing.kpvc").string()), keypos::IoError);
}

TEST_CASE("the hash reacts to content changes") {
    const auto corpus = randomCorpus(4, 10, 29);
    Vocabulary vocab = keypos::trainVocabulary(corpus, 9, 2, 3);
    const std::uint64_t before = keypos::vocabularyHash(vocab);
    vocab.wordIdf[0] += 0.125;
    CHECK(keypos::vocabularyHash(vocab) != before);
}

TEST_CASE("the json export carries the tree summary") {
    const auto corpus = randomCorpus(4, 10, 31);
    const Vocabulary vocab = keypos::trainVocabulary(corpus, 9, 2, 3);
    const auto j = nlohmann::json::parse(keypos::vocabularyToJson(vocab));
    CHECK(j["branching"].get<int>() == 9);
    CHECK(j["depth"].get<int>() == 2);
    CHECK(j["wordCount"].get<int>() == vocab.wordCount());
    CHECK(j["nodes"].size() == vocab.nodes.size());
}

} // TEST_SUITE

TEST_SUITE("bow") {

TEST_CASE("transforms are sorted, positive and normalized") {
    const OrbDescriptor a = allZeros();
    const OrbDescriptor b = allOnes();
    const Vocabulary vocab = keypos::trainVocabulary({{a}, {a}, {b}, {b}}, 9, 3, 0);

    const BowVector va = keypos::bowTransform({a}, vocab);
    REQUIRE(va.entries.size() == 1);
    CHECK(va.entries[0].weight == 1.0);

    const BowVector vab = keypos::bowTransform({a, b}, vocab);
    REQUIRE(vab.entries.size() == 2);
    CHECK(vab.entries[0].wordId < vab.entries[1].wordId);
    CHECK(vab.entries[0].weight == 0.5);
    CHECK(vab.entries[1].weight == 0.5);

    CHECK(keypos::bowTransform({}, vocab).empty());
}

TEST_CASE("database frame vectors are valid sparse distributions") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    int nonEmpty = 0;
    for (const BowVector& v : db.bowVectors) {
        if (v.empty()) continue;
        ++nonEmpty;
        double sum = 0.0;
        for (std::size_t i = 0; i < v.entries.size(); ++i) {
            CHECK(v.entries[i].weight > 0.0);
            if (i > 0) CHECK(v.entries[i].wordId > v.entries[i - 1].wordId);
            sum += v.entries[i].weight;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(nonEmpty > static_cast<int>(db.bowVectors.size()) / 2);
}

TEST_CASE("score formula on hand-built vectors") {
    const BowVector v = makeBow({{1, 0.5}, {2, 0.5}});
    CHECK(keypos::bowScore(v, v) == 1.0);
    CHECK(keypos::bowScore(makeBow({{0, 1.0}}), makeBow({{1, 1.0}})) == 0.0);
    CHECK(keypos::bowScore(v, makeBow({{1, 1.0}})) == 0.5);
}

TEST_CASE("score is symmetric and matches the oracle") {
    std::mt19937_64 rng(37);
    for (int t = 0; t < 50; ++t) {
        const BowVector a = randomBow(20, rng);
        const BowVector b = randomBow(20, rng);
        const double s = keypos::bowScore(a, b);
        CHECK(s == keypos::bowScore(b, a));
        CHECK(s == oracle::bowScore(a, b));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("the inverse index stores exactly the nonzero entries") {
    const std::vector<BowVector> vectors = {makeBow({{3, 1.0}})};
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 5);
    REQUIRE(index.wordCount() == 5);
    for (int w = 0; w < 5; ++w) {
        if (w == 3) {
            REQUIRE(index.postings[w].size() == 1);
            CHECK(index.postings[w][0].frameIndex == 0);
            CHECK(index.postings[w][0].weight == 1.0);
        } else {
            CHECK(index.postings[w].empty());
        }
    }

    const keypos::InverseIndex empty =
        keypos::buildInverseIndex(std::vector<BowVector>(3), 4);
    for (const auto& p : empty.postings) CHECK(p.empty());

    CHECK_THROWS_AS(keypos::buildInverseIndex({makeBow({{7, 1.0}})}, 5), keypos::ConfigError);
}

TEST_CASE("scattering the postings back reproduces the vectors") {
    std::mt19937_64 rng(41);
    std::vector<BowVector> vectors;
    for (int f = 0; f < 30; ++f) vectors.push_back(randomBow(12, rng));
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 12);

    std::vector<BowVector> rebuilt(vectors.size());
    for (std::uint32_t w = 0; w < 12; ++w) {
        for (const keypos::Posting& p : index.postings[w]) {
            rebuilt[p.frameIndex].entries.push_back({w, p.weight});
        }
    }
    for (std::size_t f = 0; f < vectors.size(); ++f) CHECK(rebuilt[f] == vectors[f]);
}

TEST_CASE("an indexed frame is its own best match") {
    std::mt19937_64 rng(43);
    std::vector<BowVector> vectors;
    for (int f = 0; f < 10; ++f) vectors.push_back(randomBow(30, rng));
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 30);
    std::vector<std::uint32_t> all(10);
    for (std::uint32_t f = 0; f < 10; ++f) all[f] = f;

    const auto top = keypos::inverseIndexQuery(index, vectors, vectors[7], 1, all);
    REQUIRE(top.size() == 1);
    CHECK(top[0].first == 7);
    CHECK(top[0].second == 1.0);
}

TEST_CASE("index retrieval equals brute force on random data") {
    std::mt19937_64 rng(47);
    std::vector<BowVector> vectors;
    for (int f = 0; f < 40; ++f) vectors.push_back(randomBow(20, rng));
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 20);

    for (int t = 0; t < 25; ++t) {
        const BowVector query = randomBow(20, rng);
        std::vector<std::uint32_t> candidates;
        for (std::uint32_t f = 0; f < 40; ++f) {
            if (rng() % 3 != 0) candidates.push_back(f);
        }
        const int k = 1 + static_cast<int>(rng() % 10);
        const auto got = keypos::inverseIndexQuery(index, vectors, query, k, candidates);
        const auto want = oracle::bowRank(vectors, query, candidates, k);
        CHECK(got == want);
    }
}

TEST_CASE("empty inputs give empty results") {
    std::mt19937_64 rng(53);
    std::vector<BowVector> vectors = {randomBow(8, rng), randomBow(8, rng)};
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 8);

    CHECK(keypos::inverseIndexQuery(index, vectors, BowVector{}, 5, {0, 1}).empty());
    CHECK(keypos::inverseIndexQuery(index, vectors, vectors[0], 5, {}).empty());
    CHECK(keypos::inverseIndexQuery(index, vectors, vectors[0], 0, {0, 1}).empty());
    CHECK(keypos::inverseIndexQuery(index, vectors, vectors[0], 5, {999}).empty());
}

TEST_CASE("frames sharing no word are never returned") {
    const std::vector<BowVector> vectors = {makeBow({{0, 1.0}}), makeBow({{5, 1.0}})};
    const keypos::InverseIndex index = keypos::buildInverseIndex(vectors, 6);
    const auto got = keypos::inverseIndexQuery(index, vectors, makeBow({{0, 1.0}}), 10, {1});
    CHECK(got.empty());
}

} // TEST_SUITE
