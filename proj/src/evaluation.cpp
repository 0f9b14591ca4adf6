#include "keypos/evaluation.hpp"

#include "keypos/errors.hpp"
#include "keypos/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

namespace keypos {

int indexError(const MatchSet& matches, int groundTruthIndex) {
    if (matches.empty()) throw ValidationError("index error is undefined for an empty match set");
    int best = -1;
    for (std::uint32_t f : matches.distinctFrames) {
        const int diff = std::abs(static_cast<int>(f) - groundTruthIndex);
        if (best < 0 || diff < best) best = diff;
    }
    return best;
}

double fullTrajectoryError(const std::vector<EvalRecord>& records) {
    double sum = 0.0;
    int matched = 0;
    for (const EvalRecord& r : records) {
        if (r.matched && r.minIndexDiff.has_value()) {
            sum += *r.minIndexDiff;
            ++matched;
        }
    }
    if (matched == 0) throw ValidationError("no matched records to average");
    return sum / matched;
}

double sensitivity(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw ValidationError("sensitivity is undefined for an empty run");
    int matched = 0;
    for (const EvalRecord& r : records) {
        if (r.matched) ++matched;
    }
    return static_cast<double>(matched) / records.size();
}

PrecisionRecall precisionRecall(const ConfusionCounts& cc) {
    PrecisionRecall pr;
    if (cc.tp + cc.fp > 0) {
        pr.precision = static_cast<double>(cc.tp) / (cc.tp + cc.fp);
    } else {
        pr.precisionDegenerate = true;
    }
    if (cc.tp + cc.fn > 0) {
        pr.recall = static_cast<double>(cc.tp) / (cc.tp + cc.fn);
    } else {
        pr.recallDegenerate = true;
    }
    return pr;
}

ConfusionCounts confusionFromRun(const std::vector<EvalRecord>& records) {
    ConfusionCounts cc;
    for (const EvalRecord& r : records) {
        const bool predicted = r.prediction.isKeyPosition;
        if (predicted && r.groundTruthKey) ++cc.tp;
        if (predicted && !r.groundTruthKey) ++cc.fp;
        if (!predicted && r.groundTruthKey) ++cc.fn;
    }
    return cc;
}

double keyPositionError(const std::vector<EvalRecord>& records) {
    double sum = 0.0;
    int count = 0;
    for (const EvalRecord& r : records) {
        if (r.prediction.isKeyPosition && r.groundTruthKey && r.minIndexDiff.has_value()) {
            sum += *r.minIndexDiff;
            ++count;
        }
    }
    if (count == 0) throw ValidationError("no true positives to average");
    return sum / count;
}

namespace {

EvalSummary summarize(std::vector<EvalRecord> records) {
    EvalSummary s;
    s.records = std::move(records);
    s.sensitivity = sensitivity(s.records);
    bool anyMatched = false;
    for (const EvalRecord& r : s.records) anyMatched = anyMatched || r.matched;
    s.fullTrajectoryError = anyMatched ? fullTrajectoryError(s.records) : 0.0;
    s.confusion = confusionFromRun(s.records);
    s.pr = precisionRecall(s.confusion);
    if (s.confusion.tp > 0) s.keyPositionError = keyPositionError(s.records);
    return s;
}

std::vector<EvalRecord> runQueries(const TrajectoryDatabase& db,
                                   const std::vector<MultiDescriptor>& descriptors,
                                   const Trajectory& queries, const QueryParams& params,
                                   Alignment alignment) {
    std::vector<EvalRecord> records(queries.frames.size());
    parallelFor(queries.frames.size(), [&](std::size_t i) {
        const FrameRecord& f = queries.frames[i];
        const LocalizeDetail detail = localizeWithDescriptors(db, descriptors[i], f.geo, params);
        EvalRecord rec;
        rec.queryIndex = static_cast<int>(i);
        rec.matched = detail.prediction.matched;
        rec.prediction = detail.prediction;
        rec.groundTruthKey = f.isKeyPosition();
        rec.groundTruthIndex = alignment == Alignment::Forward
                                   ? static_cast<int>(i)
                                   : db.size() - 1 - static_cast<int>(i);
        if (rec.matched) rec.minIndexDiff = indexError(detail.matches, rec.groundTruthIndex);
        records[i] = std::move(rec);
    });
    return records;
}

std::vector<MultiDescriptor> extractAll(const TrajectoryDatabase& db, const Trajectory& queries) {
    std::vector<MultiDescriptor> descriptors(queries.frames.size());
    parallelFor(queries.frames.size(), [&](std::size_t i) {
        descriptors[i] = extractDescriptors(db, queries.frames[i]);
    });
    return descriptors;
}

} // namespace

EvalSummary runEvaluation(const TrajectoryDatabase& db, const Trajectory& queries,
                          const EvalOptions& options) {
    if (queries.frames.empty()) throw ValidationError("query trajectory is empty");
    validateParams(options.params);
    const auto descriptors = extractAll(db, queries);
    return summarize(runQueries(db, descriptors, queries, options.params, options.alignment));
}

GridResult gridSearch(const TrajectoryDatabase& db, const Trajectory& queries,
                      const GridAxes& axes) {
    if (queries.frames.empty()) throw ValidationError("query trajectory is empty");
    if (axes.kGist.empty() || axes.kLdb.empty() || axes.kBow.empty() || axes.radius.empty() ||
        axes.voteN.empty()) {
        throw ConfigError("grid search requires every axis to be non-empty");
    }

    // Validate every cell before the sweep so a bad grid fails fast.
    std::vector<QueryParams> cells;
    for (int kg : axes.kGist) {
        for (int kl : axes.kLdb) {
            for (int kb : axes.kBow) {
                for (double r : axes.radius) {
                    for (int n : axes.voteN) {
                        QueryParams p;
                        p.kGist = kg;
                        p.kLdb = kl;
                        p.kBow = kb;
                        p.radius = r;
                        p.legacyDegreeRadius = axes.legacyDegreeRadius;
                        p.voteThreshold = n;
                        validateParams(p);
                        cells.push_back(p);
                    }
                }
            }
        }
    }

    const auto descriptors = extractAll(db, queries);

    GridResult result;
    result.rows.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto records = runQueries(db, descriptors, queries, cells[c], axes.alignment);
        const PrecisionRecall pr = precisionRecall(confusionFromRun(records));
        GridRow row;
        row.params = cells[c];
        row.precision = pr.precision;
        row.recall = pr.recall;
        row.f1 = pr.precision + pr.recall > 0.0
                     ? 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall)
                     : 0.0;
        result.rows[c] = row;
    }

    auto tieKey = [](const GridRow& r) {
        return std::make_tuple(r.params.voteThreshold, r.params.radius, r.params.kGist,
                               r.params.kLdb, r.params.kBow);
    };
    result.bestIndex = 0;
    for (std::size_t c = 1; c < result.rows.size(); ++c) {
        const GridRow& best = result.rows[result.bestIndex];
        const GridRow& row = result.rows[c];
        if (row.f1 > best.f1 || (row.f1 == best.f1 && tieKey(row) < tieKey(best))) {
            result.bestIndex = c;
        }
    }
    return result;
}

namespace {

std::string formatDouble(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void writeResultsCsv(const std::vector<GridRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open results file for writing: " + path);
    out << "k_gist,k_ldb,k_bow,radius,n,precision,recall,f1\n";
    for (const GridRow& r : rows) {
        out << r.params.kGist << ',' << r.params.kLdb << ',' << r.params.kBow << ','
            << formatDouble(r.params.radius) << ',' << r.params.voteThreshold << ','
            << formatDouble(r.precision) << ',' << formatDouble(r.recall) << ','
            << formatDouble(r.f1) << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing results file: " + path);
}

void writePrSvg(const std::vector<GridRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open svg file for writing: " + path);

    const int width = 640, height = 480, margin = 60;
    const int plotW = width - 2 * margin;
    const int plotH = height - 2 * margin;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - margin / 3
        << "\" text-anchor=\"middle\" font-size=\"14\">recall</text>\n";
    out << "<text x=\"" << margin / 3 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " << margin / 3
        << ' ' << height / 2 << ")\">precision</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick / 4.0;
        const int x = margin + static_cast<int>(v * plotW);
        const int y = height - margin - static_cast<int>(v * plotH);
        out << "<text x=\"" << x << "\" y=\"" << height - margin + 18
            << "\" text-anchor=\"middle\" font-size=\"10\">" << formatDouble(v) << "</text>\n";
        out << "<text x=\"" << margin - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << formatDouble(v) << "</text>\n";
    }
    for (const GridRow& r : rows) {
        const double x = margin + r.recall * plotW;
        const double y = height - margin - r.precision * plotH;
        out << "<circle cx=\"" << formatDouble(x) << "\" cy=\"" << formatDouble(y)
            << "\" r=\"4\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
    }
    out << "</svg>\n";
    out.flush();
    if (!out) throw IoError("failed writing svg file: " + path);
}

} // namespace keypos
