#pragma once

#include <string>
#include <utility>

namespace racelab {

// Test-fixture tracks, written as ordinary map files (PGM + metadata) so they
// load through the same path as user tracks.
//
// "oval": 12x8 m stadium ring, 3 m wide, ~20 m loop, start on the lower
// straight. "scurve": 16x11 m wavy ring with three gentle chicanes.
void write_oval_track(const std::string& image_path, const std::string& meta_path);
void write_scurve_track(const std::string& image_path, const std::string& meta_path);

// Resolves a track id to (image_path, meta_path). Built-in ids ("oval",
// "scurve") are generated into cache_dir on first use; anything else is
// treated as a user map: either a path to the .meta file or a basename from
// which <base>.pgm/.png and <base>.meta are derived.
std::pair<std::string, std::string> resolve_track(const std::string& id,
                                                  const std::string& cache_dir);

}  // namespace racelab
