#pragma once

#include "keypos/frame.hpp"

#include <string>

namespace keypos {

/// Loads a trajectory from a JSON-Lines frame index. One object per line:
///   {"id":0,"t":0.0,"rgb":"images/f0_rgb.png","depth":"...","ir":"...",
///    "lat":30.1,"lon":120.2,"key":3,"view":1}
/// Image paths are resolved relative to the index file. Frame indexes are
/// assigned from file order (0..N-1). Raises IoError for unreadable files and
/// ValidationError (naming the line) for malformed records, bad coordinates
/// or images that are not 320x240 in the expected encoding.
Trajectory loadTrajectory(const std::string& indexPath);

/// Writes a trajectory as <dir>/index.jsonl plus PNGs under <dir>/images/.
/// Output is byte-deterministic for identical inputs.
void saveTrajectory(const Trajectory& traj, const std::string& dir);

} // namespace keypos
