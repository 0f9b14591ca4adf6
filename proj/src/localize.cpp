#include "keypos/localize.hpp"

#include "keypos/errors.hpp"
#include "keypos/geo.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace keypos {

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

const char* channelName(Channel c) {
    switch (c) {
        case Channel::Gist:
            return "gist";
        case Channel::Ldb:
            return "ldb";
        case Channel::Bow:
            return "bow";
    }
    return "?";
}

MultiDescriptor extractDescriptors(const TrajectoryDatabase& db, const FrameRecord& frame) {
    MultiDescriptor q;
    q.gist = gistMultimodal(frame, db.bank, db.config.gistModalities);
    q.ldb = ldbCompound(frame, db.config.ldbModalities, db.config.illuminationAlpha);
    const OrbResult orb = orbExtract(toGrayscale(frame.rgb));
    q.bow = bowTransform(orb.descriptors, db.vocab);
    return q;
}

std::vector<std::uint32_t> gnssFilter(const TrajectoryDatabase& db, const GeoCoordinate& query,
                                      const QueryParams& params) {
    validateParams(params);
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < db.frames.size(); ++i) {
        const GeoCoordinate& g = db.frames[i].geo;
        const double d = params.legacyDegreeRadius ? degreeDistance(query, g)
                                                   : haversineMeters(query, g);
        if (d <= params.radius) out.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

namespace {

template <typename DistFn>
std::vector<std::pair<std::uint32_t, double>> bruteForceChannel(
    const std::vector<std::uint32_t>& candidates, int k, DistFn&& dist) {
    std::vector<std::pair<std::uint32_t, double>> scored;
    if (k <= 0) return scored;
    scored.reserve(candidates.size());
    for (std::uint32_t c : candidates) scored.emplace_back(c, dist(c));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
    return scored;
}

} // namespace

MatchSet knnMatch(const TrajectoryDatabase& db, const MultiDescriptor& query,
                  const std::vector<std::uint32_t>& candidates, const QueryParams& params) {
    validateParams(params);
    for (std::uint32_t c : candidates) {
        if (c >= db.frames.size()) throw ConfigError("candidate frame index outside database");
    }

    MatchSet ms;
    auto appendChannel = [&](Channel ch, const std::vector<std::pair<std::uint32_t, double>>& hits) {
        for (const auto& [frame, value] : hits) {
            MatchCandidate mc;
            mc.frameIndex = frame;
            mc.channel = ch;
            mc.distanceOrScore = value;
            mc.isKeyPosition = db.frames[frame].isKeyPosition();
            mc.keyPositionId = db.frames[frame].keyPositionId;
            ms.candidates.push_back(mc);
        }
    };

    appendChannel(Channel::Gist,
                  bruteForceChannel(candidates, params.kGist, [&](std::uint32_t c) {
                      return gistDistance(query.gist, db.gistVectors[c]);
                  }));
    appendChannel(Channel::Ldb, bruteForceChannel(candidates, params.kLdb, [&](std::uint32_t c) {
                      return static_cast<double>(ldbDistance(query.ldb, db.ldbVectors[c]));
                  }));
    appendChannel(Channel::Bow,
                  inverseIndexQuery(db.invIndex, db.bowVectors, query.bow, params.kBow, candidates));

    for (const MatchCandidate& mc : ms.candidates) ms.distinctFrames.push_back(mc.frameIndex);
    std::sort(ms.distinctFrames.begin(), ms.distinctFrames.end());
    ms.distinctFrames.erase(std::unique(ms.distinctFrames.begin(), ms.distinctFrames.end()),
                            ms.distinctFrames.end());
    return ms;
}

PredictionResult predictKeyPosition(const MatchSet& matches, const QueryParams& params) {
    validateParams(params);
    PredictionResult result;
    result.paramsUsed = params;
    result.matched = !matches.empty();
    if (!result.matched) return result;

    std::map<int, int> keyCounts; // keyId -> distinct-frame votes
    for (std::uint32_t f : matches.distinctFrames) {
        for (const MatchCandidate& mc : matches.candidates) {
            if (mc.frameIndex != f) continue;
            if (mc.isKeyPosition && mc.keyPositionId.has_value()) {
                ++result.votes;
                ++keyCounts[*mc.keyPositionId];
            }
            break;
        }
    }
    result.isKeyPosition = result.votes >= params.voteThreshold;
    if (!keyCounts.empty()) {
        int bestId = keyCounts.begin()->first;
        int bestCount = keyCounts.begin()->second;
        for (const auto& [id, count] : keyCounts) {
            if (count > bestCount) { // ties keep the smaller id (map order)
                bestId = id;
                bestCount = count;
            }
        }
        result.majorityKeyId = bestId;
    }
    result.nearestIndex = matches.candidates.front().frameIndex;
    return result;
}

LocalizeDetail localizeWithDescriptors(const TrajectoryDatabase& db, const MultiDescriptor& query,
                                       const GeoCoordinate& geo, const QueryParams& params) {
    LocalizeDetail detail;
    const auto t0 = Clock::now();
    const auto candidates = gnssFilter(db, geo, params);
    const double filterMs = msSince(t0);

    const auto t1 = Clock::now();
    detail.matches = knnMatch(db, query, candidates, params);
    const double matchMs = msSince(t1);

    const auto t2 = Clock::now();
    detail.prediction = predictKeyPosition(detail.matches, params);
    detail.prediction.timings.filterMs = filterMs;
    detail.prediction.timings.matchMs = matchMs;
    detail.prediction.timings.voteMs = msSince(t2);
    detail.prediction.timings.totalMs = msSince(t0);
    return detail;
}

LocalizeDetail localizeDetailed(const TrajectoryDatabase& db, const FrameRecord& frame,
                                const QueryParams& params) {
    validateParams(params);
    const auto t0 = Clock::now();
    const MultiDescriptor query = extractDescriptors(db, frame);
    const double extractMs = msSince(t0);

    LocalizeDetail detail = localizeWithDescriptors(db, query, frame.geo, params);
    detail.prediction.timings.extractMs = extractMs;
    detail.prediction.timings.totalMs = msSince(t0);
    return detail;
}

PredictionResult localize(const TrajectoryDatabase& db, const FrameRecord& frame,
                          const QueryParams& params) {
    return localizeDetailed(db, frame, params).prediction;
}

} // namespace keypos
