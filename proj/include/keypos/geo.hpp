#pragma once

namespace keypos {

inline constexpr double kEarthRadiusMeters = 6371000.0;

/// WGS-84 latitude/longitude in degrees.
struct GeoCoordinate {
    double lat = 0.0;
    double lon = 0.0;
};

bool geoValid(const GeoCoordinate& c);

/// Great-circle distance in meters on a spherical Earth model.
double haversineMeters(const GeoCoordinate& a, const GeoCoordinate& b);

/// Euclidean distance in raw (lat, lon) degree space. Only meaningful as a
/// legacy range predicate; has no physical unit.
double degreeDistance(const GeoCoordinate& a, const GeoCoordinate& b);

} // namespace keypos
