#include "keypos/geo.hpp"

#include <cmath>

namespace keypos {

namespace {
inline double toRadians(double deg) { return deg * M_PI / 180.0; }
}

bool geoValid(const GeoCoordinate& c)
{
    return std::isfinite(c.lat) && std::isfinite(c.lon) &&
           c.lat >= -90.0 && c.lat <= 90.0 &&
           c.lon >= -180.0 && c.lon <= 180.0;
}

double haversineMeters(const GeoCoordinate& a, const GeoCoordinate& b)
{
    const double phi1 = toRadians(a.lat);
    const double phi2 = toRadians(b.lat);
    const double dPhi = toRadians(b.lat - a.lat);
    const double dLambda = toRadians(b.lon - a.lon);

    const double s1 = std::sin(dPhi / 2.0);
    const double s2 = std::sin(dLambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(std::max(0.0, 1.0 - h)));
    return kEarthRadiusMeters * c;
}

double degreeDistance(const GeoCoordinate& a, const GeoCoordinate& b)
{
    const double dLat = a.lat - b.lat;
    const double dLon = a.lon - b.lon;
    return std::sqrt(dLat * dLat + dLon * dLon);
}

} // namespace keypos
