#include "keypos/frame.hpp"

#include "keypos/errors.hpp"

namespace keypos {

const char* modalitiesName(Modalities m)
{
    switch (m) {
    case Modalities::Rgb: return "rgb";
    case Modalities::RgbIr: return "rgb-ir";
    case Modalities::RgbIrD: return "rgb-ir-d";
    }
    return "?";
}

std::optional<Modalities> modalitiesFromName(const std::string& name)
{
    if (name == "rgb")
        return Modalities::Rgb;
    if (name == "rgb-ir")
        return Modalities::RgbIr;
    if (name == "rgb-ir-d")
        return Modalities::RgbIrD;
    return std::nullopt;
}

bool usesIr(Modalities m) { return m != Modalities::Rgb; }
bool usesDepth(Modalities m) { return m == Modalities::RgbIrD; }

void validateParams(const QueryParams& p)
{
    if (p.kGist < 0 || p.kLdb < 0 || p.kBow < 0)
        throw ConfigError("neighbor counts must be non-negative");
    if (p.kGist + p.kLdb + p.kBow == 0)
        throw ConfigError("at least one of kGist, kLdb, kBow must be positive");
    if (!(p.radius > 0.0))
        throw ConfigError("radius must be positive");
    if (p.voteThreshold < 1)
        throw ConfigError("vote threshold n must be >= 1");
    if (p.voteThreshold > p.kGist + p.kLdb + p.kBow)
        throw ConfigError("vote threshold n cannot exceed kGist+kLdb+kBow");
}

namespace {

void checkPlane(const ImagePlane& p, const char* name, int channels, int depthBits,
                std::vector<std::string>& out)
{
    if (!p.sizeConsistent())
        out.push_back(std::string(name) + ": sample count does not match dimensions");
    if (p.width != kFrameWidth || p.height != kFrameHeight)
        out.push_back(std::string(name) + ": dimensions " + std::to_string(p.width) + "x" +
                      std::to_string(p.height) + " differ from " +
                      std::to_string(kFrameWidth) + "x" + std::to_string(kFrameHeight));
    if (p.channels != channels || p.depthBits != depthBits)
        out.push_back(std::string(name) + ": expected " + std::to_string(channels) +
                      " channel(s) at " + std::to_string(depthBits) + " bits, got " +
                      std::to_string(p.channels) + " at " + std::to_string(p.depthBits));
}

} // namespace

std::vector<std::string> validateFrame(const FrameRecord& frame)
{
    std::vector<std::string> out;
    checkPlane(frame.rgb, "rgb", 3, 8, out);
    if (frame.depth)
        checkPlane(*frame.depth, "depth", 1, 16, out);
    if (frame.infrared)
        checkPlane(*frame.infrared, "ir", 1, 8, out);
    if (!geoValid(frame.geo))
        out.push_back("geo: lat/lon out of range");
    return out;
}

} // namespace keypos
