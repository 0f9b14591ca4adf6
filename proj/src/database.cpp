#include "keypos/database.hpp"

#include "keypos/errors.hpp"
#include "keypos/parallel.hpp"
#include "keypos/serial.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace keypos {

namespace {

constexpr char kDbMagic[4] = {'K', 'P', 'D', 'B'};
constexpr std::uint32_t kDbVersion = 1;

FrameMeta metaOf(const FrameRecord& f) {
    FrameMeta m;
    m.index = static_cast<std::uint32_t>(f.index);
    m.timestamp = f.timestamp;
    m.geo = f.geo;
    m.keyPositionId = f.keyPositionId;
    m.viewTag = f.viewTag;
    return m;
}

} // namespace

TrajectoryDatabase buildDatabase(const Trajectory& traj, const Vocabulary& vocab,
                                 const DescriptorConfig& config) {
    if (traj.frames.empty()) throw ValidationError("cannot build a database from an empty trajectory");

    TrajectoryDatabase db;
    db.config = config;
    db.vocab = vocab;
    db.bank = buildGaborBank(config.gistScales, config.gistOrientations, config.gistWorkSize);

    const std::size_t n = traj.frames.size();
    db.frames.resize(n);
    db.gistVectors.resize(n);
    db.ldbVectors.resize(n);
    db.bowVectors.resize(n);

    parallelFor(n, [&](std::size_t i) {
        const FrameRecord& f = traj.frames[i];
        db.frames[i] = metaOf(f);
        db.gistVectors[i] = gistMultimodal(f, db.bank, config.gistModalities);
        db.ldbVectors[i] = ldbCompound(f, config.ldbModalities, config.illuminationAlpha);
        const OrbResult orb = orbExtract(toGrayscale(f.rgb));
        db.bowVectors[i] = bowTransform(orb.descriptors, db.vocab);
    });

    db.invIndex = buildInverseIndex(db.bowVectors, db.vocab.wordCount());
    return db;
}

namespace {

void writeConfig(BinaryWriter& w, const DescriptorConfig& c) {
    w.putU8(static_cast<std::uint8_t>(c.gistModalities));
    w.putU8(static_cast<std::uint8_t>(c.ldbModalities));
    w.putF64(c.illuminationAlpha);
    w.putU32(static_cast<std::uint32_t>(c.gistScales));
    for (int o : c.gistOrientations) w.putU32(static_cast<std::uint32_t>(o));
    w.putU32(static_cast<std::uint32_t>(c.gistWorkSize));
    w.putU32(static_cast<std::uint32_t>(c.ldbPatchSize));
    w.putU32(static_cast<std::uint32_t>(c.ldbGrids.size()));
    for (int g : c.ldbGrids) w.putU32(static_cast<std::uint32_t>(g));
}

Modalities modalitiesFromByte(std::uint8_t b) {
    switch (b) {
        case static_cast<std::uint8_t>(Modalities::Rgb):
            return Modalities::Rgb;
        case static_cast<std::uint8_t>(Modalities::RgbIr):
            return Modalities::RgbIr;
        case static_cast<std::uint8_t>(Modalities::RgbIrD):
            return Modalities::RgbIrD;
        default:
            throw FormatError("unknown modality code in database file");
    }
}

DescriptorConfig readConfig(BinaryReader& r) {
    DescriptorConfig c;
    c.gistModalities = modalitiesFromByte(r.getU8());
    c.ldbModalities = modalitiesFromByte(r.getU8());
    c.illuminationAlpha = r.getF64();
    c.gistScales = static_cast<int>(r.getU32());
    if (c.gistScales <= 0 || c.gistScales > 16) {
        throw FormatError("implausible gist scale count in database file");
    }
    c.gistOrientations.resize(c.gistScales);
    for (int& o : c.gistOrientations) o = static_cast<int>(r.getU32());
    c.gistWorkSize = static_cast<int>(r.getU32());
    c.ldbPatchSize = static_cast<int>(r.getU32());
    const std::uint32_t gridCount = r.getU32();
    if (gridCount == 0 || gridCount > 16) {
        throw FormatError("implausible ldb grid count in database file");
    }
    c.ldbGrids.resize(gridCount);
    for (int& g : c.ldbGrids) g = static_cast<int>(r.getU32());
    return c;
}

} // namespace

void saveDatabase(const TrajectoryDatabase& db, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open database file for writing: " + path);
    BinaryWriter w(out);

    w.putMagic(kDbMagic);
    w.putU32(kDbVersion);
    w.putU32(static_cast<std::uint32_t>(db.frames.size()));
    writeConfig(w, db.config);
    w.putU64(vocabularyHash(db.vocab));

    for (const FrameMeta& m : db.frames) {
        w.putU32(m.index);
        w.putF64(m.timestamp);
        w.putF64(m.geo.lat);
        w.putF64(m.geo.lon);
        w.putI32(m.keyPositionId.value_or(-1));
        w.putI32(m.viewTag.value_or(-1));
    }

    const std::uint32_t gistLen =
        db.gistVectors.empty() ? 0 : static_cast<std::uint32_t>(db.gistVectors[0].values.size());
    w.putU32(gistLen);
    for (const GistDescriptor& g : db.gistVectors) {
        if (g.values.size() != gistLen) {
            throw ValidationError("inconsistent gist descriptor lengths in database");
        }
        for (float v : g.values) w.putF32(v);
    }

    const std::uint32_t ldbBits =
        db.ldbVectors.empty() ? 0 : static_cast<std::uint32_t>(db.ldbVectors[0].bits.size());
    w.putU32(ldbBits);
    for (const LdbDescriptor& l : db.ldbVectors) {
        if (l.bits.size() != ldbBits) {
            throw ValidationError("inconsistent ldb descriptor lengths in database");
        }
        for (std::uint64_t word : l.bits.words()) w.putU64(word);
    }

    for (const BowVector& v : db.bowVectors) {
        w.putU32(static_cast<std::uint32_t>(v.entries.size()));
        for (const BowEntry& e : v.entries) {
            w.putU32(e.wordId);
            w.putF64(e.weight);
        }
    }

    w.putU32(static_cast<std::uint32_t>(db.invIndex.postings.size()));
    for (const auto& plist : db.invIndex.postings) {
        w.putU32(static_cast<std::uint32_t>(plist.size()));
        for (const Posting& p : plist) {
            w.putU32(p.frameIndex);
            w.putF64(p.weight);
        }
    }

    writeVocabulary(db.vocab, out);
    out.flush();
    if (!out) throw IoError("failed writing database file: " + path);
}

TrajectoryDatabase loadDatabase(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open database file: " + path);
    BinaryReader r(in);

    r.expectMagic(kDbMagic, "database");
    const std::uint32_t version = r.getU32();
    if (version != kDbVersion) {
        throw FormatError("unsupported database file version " + std::to_string(version));
    }
    const std::uint32_t frameCount = r.getU32();

    TrajectoryDatabase db;
    db.config = readConfig(r);
    const std::uint64_t vocabHash = r.getU64();

    db.frames.resize(frameCount);
    for (FrameMeta& m : db.frames) {
        m.index = r.getU32();
        m.timestamp = r.getF64();
        m.geo.lat = r.getF64();
        m.geo.lon = r.getF64();
        const std::int32_t key = r.getI32();
        const std::int32_t view = r.getI32();
        if (key >= 0) m.keyPositionId = key;
        if (view >= 0) m.viewTag = view;
    }

    // Layouts are a pure function of the config; rebuild them for each frame.
    std::vector<GistLayoutEntry> gistLayout;
    {
        int offset = 0;
        std::vector<Modality> order;
        order.push_back(Modality::Rgb);
        if (usesIr(db.config.gistModalities)) order.push_back(Modality::Ir);
        if (usesDepth(db.config.gistModalities)) order.push_back(Modality::Depth);
        int filters = 0;
        for (int o : db.config.gistOrientations) filters += o;
        const int perModality = filters * kGistBlocks * kGistBlocks;
        for (Modality m : order) {
            gistLayout.push_back({m, offset, perModality});
            offset += perModality;
        }
    }
    std::vector<LdbLayoutEntry> ldbLayout;
    {
        int bitOffset = 0;
        int perModality = 0;
        for (int g : db.config.ldbGrids) {
            const int cells = g * g;
            perModality += 3 * cells * (cells - 1) / 2;
        }
        std::vector<Modality> order;
        order.push_back(Modality::Rgb);
        if (usesDepth(db.config.ldbModalities)) order.push_back(Modality::Depth);
        if (usesIr(db.config.ldbModalities)) order.push_back(Modality::Ir);
        for (Modality m : order) {
            ldbLayout.push_back({m, bitOffset, perModality});
            bitOffset += perModality;
        }
    }

    const std::uint32_t gistLen = r.getU32();
    db.gistVectors.resize(frameCount);
    for (GistDescriptor& g : db.gistVectors) {
        g.values.resize(gistLen);
        for (float& v : g.values) v = r.getF32();
        g.layout = gistLayout;
    }

    const std::uint32_t ldbBits = r.getU32();
    const std::size_t ldbWords = (ldbBits + 63) / 64;
    db.ldbVectors.resize(frameCount);
    for (LdbDescriptor& l : db.ldbVectors) {
        std::vector<std::uint64_t> words(ldbWords);
        for (std::uint64_t& word : words) word = r.getU64();
        l.bits = BitVector(ldbBits, std::move(words));
        l.layout = ldbLayout;
    }

    db.bowVectors.resize(frameCount);
    for (BowVector& v : db.bowVectors) {
        const std::uint32_t entries = r.getU32();
        v.entries.resize(entries);
        for (BowEntry& e : v.entries) {
            e.wordId = r.getU32();
            e.weight = r.getF64();
        }
    }

    const std::uint32_t wordCount = r.getU32();
    db.invIndex.postings.resize(wordCount);
    for (auto& plist : db.invIndex.postings) {
        const std::uint32_t count = r.getU32();
        plist.resize(count);
        for (Posting& p : plist) {
            p.frameIndex = r.getU32();
            p.weight = r.getF64();
        }
    }

    db.vocab = readVocabulary(in);
    if (vocabularyHash(db.vocab) != vocabHash) {
        throw FormatError("database vocabulary hash mismatch");
    }
    db.bank = buildGaborBank(db.config.gistScales, db.config.gistOrientations,
                             db.config.gistWorkSize);
    return db;
}

std::string databaseToJson(const TrajectoryDatabase& db, bool includeDescriptors) {
    nlohmann::json j;
    j["frameCount"] = db.frames.size();
    j["config"] = {
        {"gistModalities", modalitiesName(db.config.gistModalities)},
        {"ldbModalities", modalitiesName(db.config.ldbModalities)},
        {"illuminationAlpha", db.config.illuminationAlpha},
        {"gistScales", db.config.gistScales},
        {"gistOrientations", db.config.gistOrientations},
        {"gistWorkSize", db.config.gistWorkSize},
        {"ldbPatchSize", db.config.ldbPatchSize},
        {"ldbGrids", db.config.ldbGrids},
    };
    j["vocabulary"] = {
        {"branching", db.vocab.branching},
        {"depth", db.vocab.depth},
        {"wordCount", db.vocab.wordCount()},
        {"hash", vocabularyHash(db.vocab)},
    };
    nlohmann::json frames = nlohmann::json::array();
    for (const FrameMeta& m : db.frames) {
        nlohmann::json f;
        f["index"] = m.index;
        f["t"] = m.timestamp;
        f["lat"] = m.geo.lat;
        f["lon"] = m.geo.lon;
        if (m.keyPositionId) f["key"] = *m.keyPositionId;
        if (m.viewTag) f["view"] = *m.viewTag;
        frames.push_back(f);
    }
    j["frames"] = std::move(frames);
    if (includeDescriptors) {
        nlohmann::json desc;
        nlohmann::json gist = nlohmann::json::array();
        for (const GistDescriptor& g : db.gistVectors) gist.push_back(g.values);
        desc["gist"] = std::move(gist);
        nlohmann::json ldb = nlohmann::json::array();
        for (const LdbDescriptor& l : db.ldbVectors) ldb.push_back(l.bits.words());
        desc["ldbWords"] = std::move(ldb);
        nlohmann::json bow = nlohmann::json::array();
        for (const BowVector& v : db.bowVectors) {
            nlohmann::json entries = nlohmann::json::array();
            for (const BowEntry& e : v.entries) {
                entries.push_back({{"word", e.wordId}, {"weight", e.weight}});
            }
            bow.push_back(std::move(entries));
        }
        desc["bow"] = std::move(bow);
        j["descriptors"] = std::move(desc);
    }
    return j.dump(2);
}

} // namespace keypos
