#include "keypos/database.hpp"
#include "keypos/errors.hpp"
#include "keypos/evaluation.hpp"
#include "keypos/localize.hpp"
#include "keypos/orb.hpp"
#include "keypos/parallel.hpp"
#include "keypos/synth.hpp"
#include "keypos/trajectory_io.hpp"
#include "keypos/vocabulary.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using keypos::QueryParams;

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

struct ParamFlags {
    int kGist = 5;
    int kLdb = 5;
    int kBow = 5;
    double radiusMeters = 30.0;
    std::optional<double> legacyDegrees;
    int voteN = 5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--k-gist", kGist, "GIST channel neighbor count")->capture_default_str();
        cmd->add_option("--k-ldb", kLdb, "LDB channel neighbor count")->capture_default_str();
        cmd->add_option("--k-bow", kBow, "BoW channel neighbor count")->capture_default_str();
        cmd->add_option("--radius-m", radiusMeters, "GNSS candidate radius in meters")
            ->capture_default_str();
        cmd->add_option("--legacy-r-deg", legacyDegrees,
                        "treat the GNSS radius as raw lat/lon degrees (e.g. 0.02); overrides "
                        "--radius-m");
        cmd->add_option("--vote-n", voteN, "key votes required for a key-position prediction")
            ->capture_default_str();
    }

    QueryParams toParams() const {
        QueryParams p;
        p.kGist = kGist;
        p.kLdb = kLdb;
        p.kBow = kBow;
        if (legacyDegrees.has_value()) {
            p.radius = *legacyDegrees;
            p.legacyDegreeRadius = true;
        } else {
            p.radius = radiusMeters;
        }
        p.voteThreshold = voteN;
        keypos::validateParams(p);
        return p;
    }
};

std::vector<keypos::GeoCoordinate> parseGeoPath(const std::string& text) {
    std::vector<keypos::GeoCoordinate> path;
    std::stringstream points(text);
    std::string point;
    while (std::getline(points, point, ';')) {
        const auto comma = point.find(',');
        if (comma == std::string::npos) {
            throw keypos::ConfigError("geo path point needs 'lat,lon': " + point);
        }
        try {
            keypos::GeoCoordinate g;
            g.lat = std::stod(point.substr(0, comma));
            g.lon = std::stod(point.substr(comma + 1));
            path.push_back(g);
        } catch (const std::logic_error&) {
            throw keypos::ConfigError("cannot parse geo path point: " + point);
        }
    }
    return path;
}

keypos::KeySpan parseKeySpan(const std::string& text) {
    int first = 0, last = 0, id = 0;
    if (std::sscanf(text.c_str(), "%d:%d:%d", &first, &last, &id) != 3) {
        throw keypos::ConfigError("key span needs 'first:last:id': " + text);
    }
    return {first, last, id};
}

keypos::Modalities parseModalities(const std::string& name) {
    const auto m = keypos::modalitiesFromName(name);
    if (!m.has_value()) {
        throw keypos::ConfigError("unknown modalities '" + name +
                                  "' (expected rgb, rgb-ir or rgb-ir-d)");
    }
    return *m;
}

std::vector<std::vector<keypos::OrbDescriptor>> orbCorpus(const keypos::Trajectory& traj) {
    std::vector<std::vector<keypos::OrbDescriptor>> corpus(traj.frames.size());
    keypos::parallelFor(traj.frames.size(), [&](std::size_t i) {
        corpus[i] = keypos::orbExtract(keypos::toGrayscale(traj.frames[i].rgb)).descriptors;
    });
    return corpus;
}

int cmdSynth(const std::string& outDir, int frames, std::uint64_t seed,
             const std::vector<std::string>& spanSpecs, const std::string& geoSpec) {
    keypos::SynthSpec spec;
    spec.frameCount = frames;
    spec.noiseSeed = seed;
    spec.geoPath = parseGeoPath(geoSpec);
    for (const std::string& s : spanSpecs) spec.keySpans.push_back(parseKeySpan(s));

    const keypos::Trajectory traj = keypos::synthTrajectory(spec);
    keypos::saveTrajectory(traj, outDir);
    std::cout << "wrote " << traj.frames.size() << " frames to " << outDir << "\n";
    return kExitOk;
}

int cmdTrainVocab(const std::string& indexPath, const std::string& outPath, int branching,
                  int depth, std::uint64_t seed) {
    const keypos::Trajectory traj = keypos::loadTrajectory(indexPath);
    const auto corpus = orbCorpus(traj);
    const keypos::Vocabulary vocab = keypos::trainVocabulary(corpus, branching, depth, seed);
    keypos::saveVocabulary(vocab, outPath);
    std::cout << "trained vocabulary: " << vocab.wordCount() << " words from "
              << traj.frames.size() << " images -> " << outPath << "\n";
    return kExitOk;
}

int cmdBuildDb(const std::string& indexPath, const std::string& vocabPath, bool trainInline,
               std::uint64_t seed, const std::string& outPath, const std::string& ldbModalities,
               const std::string& gistModalities, double alpha) {
    using Clock = std::chrono::steady_clock;

    const auto t0 = Clock::now();
    const keypos::Trajectory traj = keypos::loadTrajectory(indexPath);

    keypos::Vocabulary vocab;
    if (trainInline) {
        vocab = keypos::trainVocabulary(orbCorpus(traj), keypos::kVocabBranching,
                                        keypos::kVocabDepth, seed);
    } else {
        if (vocabPath.empty()) {
            throw keypos::ConfigError("build-db needs --vocab or --train-vocab-inline");
        }
        vocab = keypos::loadVocabulary(vocabPath);
    }
    const auto t1 = Clock::now();

    keypos::DescriptorConfig config;
    config.ldbModalities = parseModalities(ldbModalities);
    config.gistModalities = parseModalities(gistModalities);
    config.illuminationAlpha = alpha;
    const keypos::TrajectoryDatabase db = keypos::buildDatabase(traj, vocab, config);
    const auto t2 = Clock::now();

    keypos::saveDatabase(db, outPath);
    const auto t3 = Clock::now();

    const auto ms = [](Clock::time_point a, Clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    std::cout << "built database: " << db.size() << " frames -> " << outPath << "\n";
    std::cout << "timing: load+vocab " << ms(t0, t1) << " ms, extract " << ms(t1, t2)
              << " ms, save " << ms(t2, t3) << " ms\n";
    return kExitOk;
}

int cmdQuery(const std::string& dbPath, const std::string& indexPath, int onlyFrame,
             const ParamFlags& flags, bool jsonOutput) {
    const QueryParams params = flags.toParams();
    const keypos::TrajectoryDatabase db = keypos::loadDatabase(dbPath);
    const keypos::Trajectory queries = keypos::loadTrajectory(indexPath);

    for (const keypos::FrameRecord& frame : queries.frames) {
        if (onlyFrame >= 0 && frame.index != onlyFrame) continue;
        const keypos::PredictionResult r = keypos::localize(db, frame, params);
        if (jsonOutput) {
            nlohmann::json j;
            j["queryId"] = frame.index;
            j["matched"] = r.matched;
            j["isKey"] = r.isKeyPosition;
            j["votes"] = r.votes;
            if (r.majorityKeyId) j["keyId"] = *r.majorityKeyId;
            if (r.nearestIndex) j["nearestIndex"] = *r.nearestIndex;
            j["elapsedMs"] = r.timings.totalMs;
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "query=" << frame.index << " matched=" << (r.matched ? 1 : 0)
                      << " key=" << (r.isKeyPosition ? 1 : 0) << " votes=" << r.votes
                      << " nearest=";
            if (r.nearestIndex) {
                std::cout << *r.nearestIndex;
            } else {
                std::cout << "-";
            }
            std::cout << " elapsedMs=" << r.timings.totalMs << "\n";
        }
    }
    return kExitOk;
}

keypos::Alignment parseAlignment(const std::string& name) {
    if (name == "forward") return keypos::Alignment::Forward;
    if (name == "reverse") return keypos::Alignment::Reverse;
    throw keypos::ConfigError("alignment must be 'forward' or 'reverse'");
}

int cmdEvaluate(const std::string& dbPath, const std::string& indexPath,
                const std::string& alignment, const ParamFlags& flags, const std::string& csvPath) {
    keypos::EvalOptions options;
    options.params = flags.toParams();
    options.alignment = parseAlignment(alignment);

    const keypos::TrajectoryDatabase db = keypos::loadDatabase(dbPath);
    const keypos::Trajectory queries = keypos::loadTrajectory(indexPath);
    const keypos::EvalSummary summary = keypos::runEvaluation(db, queries, options);

    char line[256];
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,", summary.fullTrajectoryError,
                  summary.sensitivity, summary.pr.precision, summary.pr.recall);
    std::string row = line;
    if (summary.keyPositionError.has_value()) {
        std::snprintf(line, sizeof(line), "%.17g", *summary.keyPositionError);
        row += line;
    }

    if (!csvPath.empty()) {
        std::ofstream out(csvPath, std::ios::binary);
        if (!out) throw keypos::IoError("cannot open csv file for writing: " + csvPath);
        out << "full_trajectory_error,sensitivity,precision,recall,key_position_error\n";
        out << row << "\n";
        if (!out) throw keypos::IoError("failed writing csv file: " + csvPath);
    }

    std::cout << "full_trajectory_error=" << summary.fullTrajectoryError
              << " sensitivity=" << summary.sensitivity << " precision=" << summary.pr.precision
              << " recall=" << summary.pr.recall;
    if (summary.keyPositionError.has_value()) {
        std::cout << " key_position_error=" << *summary.keyPositionError;
    }
    std::cout << " (tp=" << summary.confusion.tp << " fp=" << summary.confusion.fp
              << " fn=" << summary.confusion.fn << ")\n";
    return kExitOk;
}

int cmdGridSearch(const std::string& dbPath, const std::string& indexPath,
                  const keypos::GridAxes& axes, const std::string& csvPath,
                  const std::string& svgPath, const std::string& bestJsonPath) {
    const keypos::TrajectoryDatabase db = keypos::loadDatabase(dbPath);
    const keypos::Trajectory queries = keypos::loadTrajectory(indexPath);
    const keypos::GridResult result = keypos::gridSearch(db, queries, axes);

    if (!csvPath.empty()) keypos::writeResultsCsv(result.rows, csvPath);
    if (!svgPath.empty()) keypos::writePrSvg(result.rows, svgPath);

    const keypos::GridRow& best = result.rows[result.bestIndex];
    nlohmann::json bj;
    bj["kGist"] = best.params.kGist;
    bj["kLdb"] = best.params.kLdb;
    bj["kBow"] = best.params.kBow;
    bj["radius"] = best.params.radius;
    bj["legacyDegreeRadius"] = best.params.legacyDegreeRadius;
    bj["voteN"] = best.params.voteThreshold;
    bj["precision"] = best.precision;
    bj["recall"] = best.recall;
    bj["f1"] = best.f1;
    if (!bestJsonPath.empty()) {
        std::ofstream out(bestJsonPath, std::ios::binary);
        if (!out) throw keypos::IoError("cannot open json file for writing: " + bestJsonPath);
        out << bj.dump(2) << "\n";
        if (!out) throw keypos::IoError("failed writing json file: " + bestJsonPath);
    }

    std::cout << result.rows.size() << " cells, best: " << bj.dump() << "\n";
    return kExitOk;
}

int cmdExport(const std::string& dbPath, const std::string& vocabPath, const std::string& outPath,
              bool withDescriptors) {
    if (dbPath.empty() == vocabPath.empty()) {
        throw keypos::ConfigError("export needs exactly one of --db or --vocab");
    }
    std::string text;
    if (!dbPath.empty()) {
        text = keypos::databaseToJson(keypos::loadDatabase(dbPath), withDescriptors);
    } else {
        text = keypos::vocabularyToJson(keypos::loadVocabulary(vocabPath));
    }
    if (outPath.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(outPath, std::ios::binary);
        if (!out) throw keypos::IoError("cannot open export file for writing: " + outPath);
        out << text << "\n";
        if (!out) throw keypos::IoError("failed writing export file: " + outPath);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"key-position localization toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic trajectory");
    std::string synthOut;
    int synthFrames = 0;
    std::uint64_t synthSeed = 1;
    std::vector<std::string> synthSpans;
    std::string synthGeo = "0,0;0,0.00135";
    synth->add_option("--out", synthOut, "output directory")->required();
    synth->add_option("--frames", synthFrames, "frame count")->required();
    synth->add_option("--seed", synthSeed, "noise seed")->capture_default_str();
    synth->add_option("--key-span", synthSpans, "key span as first:last:id (repeatable)");
    synth->add_option("--geo", synthGeo, "polyline 'lat,lon;lat,lon;...'")->capture_default_str();

    // train-vocab
    auto* train = app.add_subcommand("train-vocab", "train a visual vocabulary from a trajectory");
    std::string trainIndex, trainOut;
    int trainBranching = keypos::kVocabBranching;
    int trainDepth = keypos::kVocabDepth;
    std::uint64_t trainSeed = 7;
    train->add_option("--index", trainIndex, "trajectory index.jsonl")->required();
    train->add_option("--out", trainOut, "output vocabulary file")->required();
    train->add_option("--branching", trainBranching, "tree branching factor")
        ->capture_default_str();
    train->add_option("--depth", trainDepth, "tree depth")->capture_default_str();
    train->add_option("--seed", trainSeed, "clustering seed")->capture_default_str();

    // build-db
    auto* build = app.add_subcommand("build-db", "extract descriptors and write a database");
    std::string buildIndex, buildVocab, buildOut;
    bool buildInlineVocab = false;
    std::uint64_t buildSeed = 7;
    std::string buildLdbModalities = "rgb-ir-d";
    std::string buildGistModalities = "rgb";
    double buildAlpha = keypos::kIlluminationAlpha;
    build->add_option("--index", buildIndex, "trajectory index.jsonl")->required();
    build->add_option("--vocab", buildVocab, "vocabulary file");
    build->add_flag("--train-vocab-inline", buildInlineVocab,
                    "train the vocabulary on the database trajectory itself");
    build->add_option("--seed", buildSeed, "inline vocabulary seed")->capture_default_str();
    build->add_option("--out", buildOut, "output database file")->required();
    build->add_option("--modalities", buildLdbModalities, "LDB modalities (rgb, rgb-ir, rgb-ir-d)")
        ->capture_default_str();
    build->add_option("--gist-modalities", buildGistModalities, "GIST modalities")
        ->capture_default_str();
    build->add_option("--alpha", buildAlpha, "illumination-invariance alpha")
        ->capture_default_str();

    // query
    auto* query = app.add_subcommand("query", "localize query frames against a database");
    std::string queryDb, queryIndex;
    int queryFrame = -1;
    bool queryJson = false;
    ParamFlags queryFlags;
    query->add_option("--db", queryDb, "database file")->required();
    query->add_option("--index", queryIndex, "query trajectory index.jsonl")->required();
    query->add_option("--frame", queryFrame, "only this frame id");
    query->add_flag("--json", queryJson, "one JSON object per frame");
    queryFlags.attach(query);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run the evaluation metrics over a query set");
    std::string evalDb, evalIndex, evalCsv;
    std::string evalAlignment = "forward";
    ParamFlags evalFlags;
    evaluate->add_option("--db", evalDb, "database file")->required();
    evaluate->add_option("--index", evalIndex, "query trajectory index.jsonl")->required();
    evaluate->add_option("--alignment", evalAlignment, "ground-truth alignment (forward|reverse)")
        ->capture_default_str();
    evaluate->add_option("--csv", evalCsv, "write metrics CSV here");
    evalFlags.attach(evaluate);

    // grid-search
    auto* grid = app.add_subcommand("grid-search", "sweep retrieval parameters");
    std::string gridDb, gridIndex, gridCsv, gridSvg, gridBestJson;
    std::vector<int> gridKGist = {5}, gridKLdb = {5}, gridKBow = {5}, gridVoteN = {5};
    std::vector<double> gridRadius = {30.0};
    bool gridLegacyDeg = false;
    std::string gridAlignment = "forward";
    grid->add_option("--db", gridDb, "database file")->required();
    grid->add_option("--index", gridIndex, "query trajectory index.jsonl")->required();
    grid->add_option("--k-gist", gridKGist, "GIST k axis")->delimiter(',')->capture_default_str();
    grid->add_option("--k-ldb", gridKLdb, "LDB k axis")->delimiter(',')->capture_default_str();
    grid->add_option("--k-bow", gridKBow, "BoW k axis")->delimiter(',')->capture_default_str();
    grid->add_option("--radius", gridRadius, "radius axis (meters, or degrees with --legacy-deg)")
        ->delimiter(',')
        ->capture_default_str();
    grid->add_option("--vote-n", gridVoteN, "vote threshold axis")
        ->delimiter(',')
        ->capture_default_str();
    grid->add_flag("--legacy-deg", gridLegacyDeg, "radius axis is raw lat/lon degrees");
    grid->add_option("--alignment", gridAlignment, "ground-truth alignment (forward|reverse)")
        ->capture_default_str();
    grid->add_option("--csv", gridCsv, "write the results CSV here");
    grid->add_option("--svg", gridSvg, "write the PR scatter here");
    grid->add_option("--best-json", gridBestJson, "write the best cell here");

    // export
    auto* exp = app.add_subcommand("export", "dump a database or vocabulary as JSON");
    std::string expDb, expVocab, expOut;
    bool expDescriptors = false;
    exp->add_option("--db", expDb, "database file");
    exp->add_option("--vocab", expVocab, "vocabulary file");
    exp->add_option("--out", expOut, "output path (stdout when omitted)");
    exp->add_flag("--with-descriptors", expDescriptors, "include descriptor blocks");

    try {
        app.parse(argc, argv);

        if (synth->parsed()) {
            return cmdSynth(synthOut, synthFrames, synthSeed, synthSpans, synthGeo);
        }
        if (train->parsed()) {
            return cmdTrainVocab(trainIndex, trainOut, trainBranching, trainDepth, trainSeed);
        }
        if (build->parsed()) {
            return cmdBuildDb(buildIndex, buildVocab, buildInlineVocab, buildSeed, buildOut,
                              buildLdbModalities, buildGistModalities, buildAlpha);
        }
        if (query->parsed()) {
            return cmdQuery(queryDb, queryIndex, queryFrame, queryFlags, queryJson);
        }
        if (evaluate->parsed()) {
            return cmdEvaluate(evalDb, evalIndex, evalAlignment, evalFlags, evalCsv);
        }
        if (grid->parsed()) {
            keypos::GridAxes axes;
            axes.kGist = gridKGist;
            axes.kLdb = gridKLdb;
            axes.kBow = gridKBow;
            axes.radius = gridRadius;
            axes.voteN = gridVoteN;
            axes.legacyDegreeRadius = gridLegacyDeg;
            axes.alignment = parseAlignment(gridAlignment);
            return cmdGridSearch(gridDb, gridIndex, axes, gridCsv, gridSvg, gridBestJson);
        }
        if (exp->parsed()) {
            return cmdExport(expDb, expVocab, expOut, expDescriptors);
        }
        std::cerr << "no subcommand selected\n";
        return kExitBadArgs;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadArgs;
    } catch (const keypos::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const keypos::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const keypos::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const keypos::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
