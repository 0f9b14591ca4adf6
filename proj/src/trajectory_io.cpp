#include "keypos/trajectory_io.hpp"

#include "keypos/errors.hpp"
#include "keypos/png_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace keypos {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ImagePlane loadPlane(const fs::path& base, const std::string& rel, int line,
                     const char* name, int channels, int depthBits)
{
    const fs::path full = base / rel;
    ImagePlane p;
    try {
        p = readPng(full.string());
    } catch (const FormatError& e) {
        throw ValidationError("line " + std::to_string(line) + ": " + name + ": " + e.what());
    }
    if (p.channels != channels || p.depthBits != depthBits)
        throw ValidationError("line " + std::to_string(line) + ": " + name + " image " + rel +
                              " has " + std::to_string(p.channels) + " channel(s) at " +
                              std::to_string(p.depthBits) + " bits, expected " +
                              std::to_string(channels) + " at " + std::to_string(depthBits));
    if (p.width != kFrameWidth || p.height != kFrameHeight)
        throw ValidationError("line " + std::to_string(line) + ": " + name + " image " + rel +
                              " is " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                              ", expected " + std::to_string(kFrameWidth) + "x" +
                              std::to_string(kFrameHeight));
    return p;
}

} // namespace

Trajectory loadTrajectory(const std::string& indexPath)
{
    std::ifstream in(indexPath);
    if (!in)
        throw IoError("cannot open frame index: " + indexPath);
    const fs::path base = fs::path(indexPath).parent_path();

    Trajectory traj;
    traj.name = fs::path(indexPath).parent_path().filename().string();

    std::string lineText;
    int line = 0;
    while (std::getline(in, lineText)) {
        ++line;
        if (lineText.empty())
            continue;
        json rec;
        try {
            rec = json::parse(lineText);
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line) + ": malformed JSON record: " + e.what());
        }
        if (!rec.is_object())
            throw ValidationError("line " + std::to_string(line) + ": record is not a JSON object");
        for (const char* field : {"t", "rgb", "lat", "lon"})
            if (!rec.contains(field))
                throw ValidationError("line " + std::to_string(line) + ": missing field \"" +
                                      field + "\"");

        FrameRecord frame;
        frame.index = static_cast<int>(traj.frames.size());
        try {
            frame.timestamp = rec.at("t").get<double>();
            frame.geo.lat = rec.at("lat").get<double>();
            frame.geo.lon = rec.at("lon").get<double>();
            if (rec.contains("key"))
                frame.keyPositionId = rec.at("key").get<int>();
            if (rec.contains("view"))
                frame.viewTag = rec.at("view").get<int>();
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line) + ": bad field type: " + e.what());
        }
        if (!geoValid(frame.geo))
            throw ValidationError("line " + std::to_string(line) + ": lat/lon out of range (lat=" +
                                  std::to_string(frame.geo.lat) + ", lon=" +
                                  std::to_string(frame.geo.lon) + ")");

        frame.rgb = loadPlane(base, rec.at("rgb").get<std::string>(), line, "rgb", 3, 8);
        if (rec.contains("depth"))
            frame.depth = loadPlane(base, rec.at("depth").get<std::string>(), line, "depth", 1, 16);
        if (rec.contains("ir"))
            frame.infrared = loadPlane(base, rec.at("ir").get<std::string>(), line, "ir", 1, 8);

        traj.frames.push_back(std::move(frame));
    }
    return traj;
}

void saveTrajectory(const Trajectory& traj, const std::string& dir)
{
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root / "images", ec);
    if (ec)
        throw IoError("cannot create output directory: " + (root / "images").string());

    std::ofstream out(root / "index.jsonl", std::ios::binary);
    if (!out)
        throw IoError("cannot open index for writing: " + (root / "index.jsonl").string());

    char nameBuf[64];
    for (const FrameRecord& frame : traj.frames) {
        json rec;
        rec["id"] = frame.index;
        rec["t"] = frame.timestamp;
        std::snprintf(nameBuf, sizeof(nameBuf), "images/frame_%06d_rgb.png", frame.index);
        rec["rgb"] = nameBuf;
        writePng((root / nameBuf).string(), frame.rgb);
        if (frame.depth) {
            std::snprintf(nameBuf, sizeof(nameBuf), "images/frame_%06d_depth.png", frame.index);
            rec["depth"] = nameBuf;
            writePng((root / nameBuf).string(), *frame.depth);
        }
        if (frame.infrared) {
            std::snprintf(nameBuf, sizeof(nameBuf), "images/frame_%06d_ir.png", frame.index);
            rec["ir"] = nameBuf;
            writePng((root / nameBuf).string(), *frame.infrared);
        }
        rec["lat"] = frame.geo.lat;
        rec["lon"] = frame.geo.lon;
        if (frame.keyPositionId)
            rec["key"] = *frame.keyPositionId;
        if (frame.viewTag)
            rec["view"] = *frame.viewTag;
        out << rec.dump() << '\n';
    }
    if (!out)
        throw IoError("write failed: " + (root / "index.jsonl").string());
}

} // namespace keypos
