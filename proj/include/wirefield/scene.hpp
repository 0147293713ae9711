/*
 * Copyright 2026 The Wirefield Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wirefield/geom.hpp"

namespace wirefield {

/// Vectorized scene: junction points plus segments referencing them by
/// index. Coordinates are image pixels in [0, width) x [0, height).
struct Wireframe {
    int width = 0;
    int height = 0;
    std::vector<Point> junctions;
    std::vector<std::pair<int, int>> segments;

    LineSegment segment_geometry(int i) const {
        return {junctions[segments[i].first], junctions[segments[i].second]};
    }
};

/// Wireframe plus per-segment and per-junction scores in [0, 1].
struct ScoredWireframe : Wireframe {
    std::vector<double> segment_scores;
    std::vector<double> junction_scores;
};

/// Junctions closer than this are considered the same point.
inline constexpr double kJunctionDedupTolerance = 1e-6;

/// Throws InvariantError (message carries the offending field path) if the
/// wireframe violates any structural invariant: index range, degenerate
/// segments, duplicate junctions, unreferenced junctions, points outside
/// the image.
void validate_wireframe(const Wireframe& wf);

/// Additionally checks score vector lengths and ranges.
void validate_scored_wireframe(const ScoredWireframe& wf);

/// Loads and validates an annotation document. Throws DataError when the
/// file cannot be read or parsed, InvariantError when it parses but the
/// wireframe invariants fail.
Wireframe load_wireframe(const std::string& path);

/// Same, keeping the optional score arrays (missing scores default to 1).
ScoredWireframe load_scored_wireframe(const std::string& path);

/// Writes the annotation document; coordinates round-trip exactly.
void save_wireframe(const ScoredWireframe& wf, const std::string& path);

/// Convenience: wraps a plain wireframe with unit scores and saves it.
void save_wireframe(const Wireframe& wf, const std::string& path);

/// Seeded synthetic scene: n_segments segments of length >= min_len, all
/// non-adjacent pairs separated by >= min_separation, and endpoints shared
/// with probability share_prob so junctions of degree >= 2 occur. Every
/// distinct junction pair is at least min_separation apart. Throws
/// InvariantError when the request cannot be met after bounded retries.
Wireframe synth_scene(uint64_t seed, const GridSpec& spec, int n_segments, double min_len,
                      double min_separation, double share_prob = 0.3);

/// Rescales a wireframe to the coarse grid (divides all coordinates by
/// the downsampling factor).
Wireframe to_coarse(const Wireframe& wf, const GridSpec& spec);

}  // namespace wirefield
