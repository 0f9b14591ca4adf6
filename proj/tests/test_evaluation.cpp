#include "keypos/evaluation.hpp"

#include "keypos/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>
#include <vector>

using keypos::Alignment;
using keypos::ConfusionCounts;
using keypos::EvalOptions;
using keypos::EvalRecord;
using keypos::EvalSummary;
using keypos::GridAxes;
using keypos::GridResult;
using keypos::MatchSet;
using keypos::QueryParams;

namespace {

std::filesystem::path tempDir() {
    const auto dir = std::filesystem::temp_directory_path() / "keypos-eval-tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string fileBytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

MatchSet setOfFrames(std::vector<std::uint32_t> frames) {
    MatchSet ms;
    for (std::uint32_t f : frames) {
        keypos::MatchCandidate mc;
        mc.frameIndex = f;
        ms.candidates.push_back(mc);
    }
    ms.distinctFrames = std::move(frames);
    std::sort(ms.distinctFrames.begin(), ms.distinctFrames.end());
    ms.distinctFrames.erase(std::unique(ms.distinctFrames.begin(), ms.distinctFrames.end()),
                            ms.distinctFrames.end());
    return ms;
}

EvalRecord record(bool matched, std::optional<int> minDiff, bool predictedKey,
                  bool truthKey) {
    EvalRecord r;
    r.matched = matched;
    r.minIndexDiff = minDiff;
    r.prediction.matched = matched;
    r.prediction.isKeyPosition = predictedKey;
    r.groundTruthKey = truthKey;
    return r;
}

keypos::Trajectory prefix(const keypos::Trajectory& traj, std::size_t count) {
    keypos::Trajectory out;
    out.name = traj.name;
    out.frames.assign(traj.frames.begin(), traj.frames.begin() + count);
    return out;
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("index error is the distance to the closest matched frame") {
    CHECK(keypos::indexError(setOfFrames({140, 7, 12}), 10) == 2);
    CHECK(keypos::indexError(setOfFrames({140, 7, 10}), 10) == 0);
    CHECK(keypos::indexError(setOfFrames({50}), 0) == 50);
    CHECK_THROWS_AS(keypos::indexError(MatchSet{}, 3), keypos::ValidationError);
}

TEST_CASE("trajectory error averages matched records only") {
    std::vector<EvalRecord> records = {record(true, 2, false, false),
                                       record(true, 4, false, false)};
    CHECK(keypos::fullTrajectoryError(records) == 3.0);

    records = {record(true, 5, false, false), record(false, std::nullopt, false, false)};
    CHECK(keypos::fullTrajectoryError(records) == 5.0);

    records = {record(false, std::nullopt, false, false)};
    CHECK_THROWS_AS(keypos::fullTrajectoryError(records), keypos::ValidationError);
}

TEST_CASE("sensitivity is the matched fraction") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 10; ++i) {
        records.push_back(record(i < 8, i < 8 ? std::optional<int>(0) : std::nullopt,
                                 false, false));
    }
    CHECK(keypos::sensitivity(records) == 0.8);
    CHECK_THROWS_AS(keypos::sensitivity({}), keypos::ValidationError);
}

TEST_CASE("precision and recall handle degenerate counts") {
    const auto pr = keypos::precisionRecall({8, 2, 4});
    CHECK(pr.precision == 0.8);
    CHECK(pr.recall == 8.0 / 12.0);
    CHECK_FALSE(pr.precisionDegenerate);
    CHECK_FALSE(pr.recallDegenerate);

    const auto perfect = keypos::precisionRecall({5, 0, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);

    const auto empty = keypos::precisionRecall({0, 0, 0});
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.precisionDegenerate);
    CHECK(empty.recallDegenerate);

    const auto allFalse = keypos::precisionRecall({0, 5, 0});
    CHECK(allFalse.precision == 0.0);
    CHECK_FALSE(allFalse.precisionDegenerate);
    CHECK(allFalse.recallDegenerate);
}

TEST_CASE("the confusion counts classify each record once") {
    const std::vector<EvalRecord> records = {
        record(true, 0, true, true),   // TP
        record(true, 3, true, false),  // FP
        record(true, 1, false, true),  // FN
        record(true, 2, false, false), // TN
    };
    const ConfusionCounts cc = keypos::confusionFromRun(records);
    CHECK(cc.tp == 1);
    CHECK(cc.fp == 1);
    CHECK(cc.fn == 1);
}

TEST_CASE("key position error averages the true positives") {
    const std::vector<EvalRecord> records = {
        record(true, 3, true, true),
        record(true, 5, true, true),
        record(true, 100, true, false), // FP, ignored
        record(true, 50, false, true),  // FN, ignored
    };
    CHECK(keypos::keyPositionError(records) == 4.0);

    const std::vector<EvalRecord> noTp = {record(true, 1, true, false)};
    CHECK_THROWS_AS(keypos::keyPositionError(noTp), keypos::ValidationError);
}

TEST_CASE("a self-query run is perfect end to end") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    const keypos::Trajectory& traj = fixtures::sharedTrajectory();
    const EvalSummary s = keypos::runEvaluation(db, traj, EvalOptions{});

    REQUIRE(s.records.size() == 142);
    CHECK(s.sensitivity == 1.0);
    CHECK(s.fullTrajectoryError == 0.0);
    CHECK(s.confusion.tp == 24);
    CHECK(s.confusion.fp == 0);
    CHECK(s.confusion.fn == 0);
    CHECK(s.pr.precision == 1.0);
    CHECK(s.pr.recall == 1.0);
    REQUIRE(s.keyPositionError.has_value());
    CHECK(*s.keyPositionError == 0.0);
    for (const EvalRecord& r : s.records) {
        CHECK(r.groundTruthIndex == r.queryIndex);
        CHECK(r.matched);
        CHECK(r.minIndexDiff == 0);
    }

    CHECK_THROWS_AS(keypos::runEvaluation(db, keypos::Trajectory{}, EvalOptions{}),
                    keypos::ValidationError);
}

TEST_CASE("reverse alignment mirrors the ground-truth index") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    const keypos::Trajectory queries = prefix(fixtures::sharedTrajectory(), 30);
    EvalOptions options;
    options.alignment = Alignment::Reverse;
    const EvalSummary s = keypos::runEvaluation(db, queries, options);
    REQUIRE(s.records.size() == 30);
    for (const EvalRecord& r : s.records) {
        CHECK(r.groundTruthIndex == db.size() - 1 - r.queryIndex);
    }
    CHECK(s.records[0].groundTruthIndex == 141);
    // Matches stay within the GNSS radius of the query frame, far from the
    // mirrored ground truth, so the reverse error is necessarily large.
    CHECK(s.fullTrajectoryError > 50.0);
}

TEST_CASE("the grid sweep expands the full cartesian product") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    const keypos::Trajectory queries = prefix(fixtures::sharedTrajectory(), 20);

    GridAxes axes;
    axes.kGist = {1, 5};
    axes.kLdb = {1, 5};
    axes.kBow = {1, 5};
    axes.radius = {15.0, 30.0};
    axes.voteN = {1, 3};
    const GridResult grid = keypos::gridSearch(db, queries, axes);
    REQUIRE(grid.rows.size() == 32);

    // voteN is the innermost axis, kGist the outermost.
    CHECK(grid.rows[0].params.voteThreshold == 1);
    CHECK(grid.rows[1].params.voteThreshold == 3);
    CHECK(grid.rows[0].params.radius == 15.0);
    CHECK(grid.rows[2].params.radius == 30.0);
    CHECK(grid.rows[0].params.kGist == 1);
    CHECK(grid.rows[16].params.kGist == 5);

    std::size_t want = 0;
    auto tieKey = [](const keypos::GridRow& r) {
        return std::make_tuple(r.params.voteThreshold, r.params.radius, r.params.kGist,
                               r.params.kLdb, r.params.kBow);
    };
    for (std::size_t c = 1; c < grid.rows.size(); ++c) {
        const auto& best = grid.rows[want];
        const auto& row = grid.rows[c];
        if (row.f1 > best.f1 || (row.f1 == best.f1 && tieKey(row) < tieKey(best))) want = c;
    }
    CHECK(grid.bestIndex == want);
    for (const auto& row : grid.rows) {
        CHECK(row.precision >= 0.0);
        CHECK(row.precision <= 1.0);
        CHECK(row.recall >= 0.0);
        CHECK(row.recall <= 1.0);
        CHECK(row.f1 >= 0.0);
        CHECK(row.f1 <= 1.0);
    }
}

TEST_CASE("a single grid cell equals an independent run") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    const keypos::Trajectory queries = prefix(fixtures::sharedTrajectory(), 30);

    GridAxes axes;
    axes.kGist = {5};
    axes.kLdb = {5};
    axes.kBow = {5};
    axes.radius = {30.0};
    axes.voteN = {5};
    const GridResult grid = keypos::gridSearch(db, queries, axes);
    REQUIRE(grid.rows.size() == 1);
    CHECK(grid.bestIndex == 0);

    const EvalSummary s = keypos::runEvaluation(db, queries, EvalOptions{});
    CHECK(grid.rows[0].precision == s.pr.precision);
    CHECK(grid.rows[0].recall == s.pr.recall);
    const double f1 = s.pr.precision + s.pr.recall > 0.0
                          ? 2.0 * s.pr.precision * s.pr.recall / (s.pr.precision + s.pr.recall)
                          : 0.0;
    CHECK(grid.rows[0].f1 == f1);
}

TEST_CASE("bad grids fail before any work runs") {
    const keypos::TrajectoryDatabase& db = fixtures::sharedDatabase();
    const keypos::Trajectory queries = prefix(fixtures::sharedTrajectory(), 5);

    GridAxes empty;
    empty.kGist = {};
    empty.kLdb = {5};
    empty.kBow = {5};
    empty.radius = {30.0};
    empty.voteN = {1};
    CHECK_THROWS_AS(keypos::gridSearch(db, queries, empty), keypos::ConfigError);

    GridAxes badCell;
    badCell.kGist = {1};
    badCell.kLdb = {1};
    badCell.kBow = {1};
    badCell.radius = {30.0};
    badCell.voteN = {4}; // exceeds the channel sum
    CHECK_THROWS_AS(keypos::gridSearch(db, queries, badCell), keypos::ConfigError);
}

TEST_CASE("csv output is stable and carries the fixed header") {
    std::vector<keypos::GridRow> rows(3);
    rows[0].params = QueryParams{1, 2, 3, 12.5, false, 2};
    rows[0].precision = 0.25;
    rows[0].recall = 1.0 / 3.0;
    rows[0].f1 = 2.0 * 0.25 * (1.0 / 3.0) / (0.25 + 1.0 / 3.0);
    rows[1].params = QueryParams{5, 5, 5, 30.0, false, 5};
    rows[1].precision = 1.0;
    rows[1].recall = 1.0;
    rows[1].f1 = 1.0;
    rows[2].params = QueryParams{2, 0, 1, 7.0, false, 1};

    const auto path = (tempDir() / "rows.csv").string();
    keypos::writeResultsCsv(rows, path);
    const std::string bytes = fileBytes(path);

    std::istringstream lines(bytes);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "k_gist,k_ldb,k_bow,radius,n,precision,recall,f1");
    int dataLines = 0;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
        ++dataLines;
    }
    CHECK(dataLines == 3);
    REQUIRE(bytes.find("\n") != std::string::npos);
    CHECK(bytes.substr(bytes.find('\n') + 1, 6) == "1,2,3,");

    keypos::writeResultsCsv(rows, path);
    CHECK(fileBytes(path) == bytes);

    const auto emptyPath = (tempDir() / "empty.csv").string();
    keypos::writeResultsCsv({}, emptyPath);
    CHECK(fileBytes(emptyPath) == "k_gist,k_ldb,k_bow,radius,n,precision,recall,f1\n");
}

TEST_CASE("the scatter export emits an svg document") {
    std::vector<keypos::GridRow> rows(2);
    rows[0].precision = 0.5;
    rows[0].recall = 0.25;
    rows[0].f1 = 1.0 / 3.0;
    rows[1].precision = 1.0;
    rows[1].recall = 1.0;
    rows[1].f1 = 1.0;
    const auto path = (tempDir() / "grid.svg").string();
    keypos::writePrSvg(rows, path);
    const std::string bytes = fileBytes(path);
    CHECK(bytes.rfind("<svg", 0) == 0);
    CHECK(bytes.find("</svg>") != std::string::npos);
}

} // TEST_SUITE
