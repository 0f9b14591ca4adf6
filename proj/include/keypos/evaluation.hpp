#pragma once

#include "keypos/database.hpp"
#include "keypos/localize.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace keypos {

struct ConfusionCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    bool precisionDegenerate = false; // TP+FP == 0
    bool recallDegenerate = false;    // TP+FN == 0
};

struct EvalRecord {
    int queryIndex = 0;
    bool matched = false;
    std::optional<int> minIndexDiff; // present iff matched
    PredictionResult prediction;
    bool groundTruthKey = false;
    int groundTruthIndex = 0;
};

/// Minimal |frameIndex - groundTruthIndex| over the distinct matched frames.
int indexError(const MatchSet& matches, int groundTruthIndex);

/// Mean minIndexDiff over matched records only; unmatched records are
/// excluded here and counted against sensitivity instead.
double fullTrajectoryError(const std::vector<EvalRecord>& records);

/// Matched fraction of all records.
double sensitivity(const std::vector<EvalRecord>& records);

/// precision = TP/(TP+FP), recall = TP/(TP+FN); 0/0 reports 0 with the
/// matching degenerate flag set.
PrecisionRecall precisionRecall(const ConfusionCounts& cc);

ConfusionCounts confusionFromRun(const std::vector<EvalRecord>& records);

/// Mean minIndexDiff over true positives (predicted key and truly key).
double keyPositionError(const std::vector<EvalRecord>& records);

enum class Alignment { Forward, Reverse };

struct EvalOptions {
    QueryParams params;
    Alignment alignment = Alignment::Forward;
};

struct EvalSummary {
    std::vector<EvalRecord> records;
    double fullTrajectoryError = 0.0;
    double sensitivity = 0.0;
    ConfusionCounts confusion;
    PrecisionRecall pr;
    std::optional<double> keyPositionError; // absent when there is no TP
};

/// Runs every query frame through the pipeline. Ground-truth index is the
/// query's own index (Forward) or dbSize-1-queryIndex (Reverse); ground-truth
/// key labels come from the query trajectory.
EvalSummary runEvaluation(const TrajectoryDatabase& db, const Trajectory& queries,
                          const EvalOptions& options);

struct GridAxes {
    std::vector<int> kGist;
    std::vector<int> kLdb;
    std::vector<int> kBow;
    std::vector<double> radius;
    std::vector<int> voteN;
    bool legacyDegreeRadius = false;
    Alignment alignment = Alignment::Forward;
};

struct GridRow {
    QueryParams params;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct GridResult {
    std::vector<GridRow> rows; // Cartesian product, axis-nesting order
    std::size_t bestIndex = 0; // max F1, ties by smaller (n, radius, kG, kL, kB)
};

/// Full Cartesian sweep; query descriptors are extracted once and reused, so
/// every cell matches exactly what an independent single-cell run computes.
GridResult gridSearch(const TrajectoryDatabase& db, const Trajectory& queries,
                      const GridAxes& axes);

/// CSV with the fixed header k_gist,k_ldb,k_bow,radius,n,precision,recall,f1.
void writeResultsCsv(const std::vector<GridRow>& rows, const std::string& path);

/// Recall/precision scatter of the grid rows.
void writePrSvg(const std::vector<GridRow>& rows, const std::string& path);

} // namespace keypos
