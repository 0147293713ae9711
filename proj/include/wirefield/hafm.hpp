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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "wirefield/geom.hpp"
#include "wirefield/grid.hpp"
#include "wirefield/scene.hpp"

namespace wirefield {

struct CodecConfig {
    double d_max = 5.0;  // coarse px
    void validate() const {
        if (!(d_max > 0.0)) throw InvariantError("codec config: d_max must be positive");
    }
};

/// One foreground field sample in physical (denormalized) units. A pixel
/// carrying (d, theta, theta1, theta2) determines its attracting segment
/// exactly: the endpoints sit at px + d*R(theta)*(1, tan(theta_k)).
struct AttractionSample {
    double d = 0.0;       // perpendicular distance, (0, d_max]
    double theta = 0.0;   // attraction direction, [-pi, pi)
    double theta1 = 0.0;  // top endpoint angle, (0, pi/2)
    double theta2 = 0.0;  // bottom endpoint angle, (-pi/2, 0]
};

/// 4 x H' x W' field map in normalized channel units:
///   ch0 = d / d_max, ch1 = theta/(2*pi) + 1/2,
///   ch2 = 2*theta1/pi, ch3 = -2*theta2/pi.
/// Background pixels carry the sentinel (-1, 0, 0, 0).
struct AttractionFieldMap {
    GridSpec spec;
    MultiGrid channels;  // 4 channels

    bool is_background(int r, int c) const { return channels.at(0, r, c) < 0.0; }
};

inline constexpr std::array<double, 4> kBackgroundSample = {-1.0, 0.0, 0.0, 0.0};

/// Per-pixel |d_gt - d_pred| in normalized units; 0 on background.
struct ResidualMap {
    GridSpec spec;
    Grid<double> values;
};

/// Redundant reference encoding: the three displacement vectors from a
/// pixel to the foot of perpendicular and to the two endpoints.
struct SixDSample {
    Point v0, v1, v2;  // point->foot, point->top endpoint, point->bottom endpoint
};

struct SixDFieldMap {
    GridSpec spec;
    std::vector<std::optional<SixDSample>> cells;  // row-major

    const std::optional<SixDSample>& at(int r, int c) const {
        return cells[static_cast<size_t>(r) * spec.cols() + c];
    }
    std::optional<SixDSample>& at(int r, int c) {
        return cells[static_cast<size_t>(r) * spec.cols() + c];
    }
};

/// Line-segment proposal decoded from one pixel. Geometry in coarse px.
/// Junction indices and the score are filled in by later stages.
struct LineProposal {
    LineSegment seg;
    int row = 0;
    int col = 0;
    double score = 0.0;
    int junction_a = -1;
    int junction_b = -1;
};

/// Center of a coarse bin, in coarse coordinates.
inline Point bin_center(int row, int col) { return {col + 0.5, row + 0.5}; }

/// Pixels closer to their segment's line than this are treated as lying on
/// the segment and stay background (coarse px). Their canonical endpoint
/// angles would sit within one floating-point bit of +-pi/2, where the
/// dual representation stops being invertible in double precision.
inline constexpr double kMinSupportDistance = 1e-3;

/// Nearest-segment assignment per coarse pixel (endpoint-clamped distance,
/// ties to the lower index), demoted to -1 where the winner's canonical
/// frame is background, nearer than kMinSupportDistance, or farther than
/// d_max.
Grid<int> assign_support(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg = {});

std::array<double, 4> normalize_sample(const AttractionSample& s, const CodecConfig& cfg);
AttractionSample denormalize_sample(const std::array<double, 4>& ch, const CodecConfig& cfg);

/// Ground-truth field map of a wireframe.
AttractionFieldMap encode(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg = {});

/// Closed-form inverse for a single pixel.
LineSegment decode_pixel(const Point& px, const AttractionSample& s);

/// Decodes every foreground pixel into proposals. With a residual map the
/// distance is enumerated as d' = d + kappa*residual for kappa in
/// {-1, 0, +1}, keeping candidates with 0 < d' <= d_max; a zero residual
/// emits the single undisplaced proposal.
std::vector<LineProposal> decode(const AttractionFieldMap& afm, const ResidualMap* residual,
                                 const CodecConfig& cfg = {});

SixDFieldMap encode_6d(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg = {});
std::vector<LineProposal> decode_6d(const SixDFieldMap& map);

/// |d_gt - d_pred| per pixel on the common foreground, 0 elsewhere.
/// Throws InvariantError when the specs differ.
ResidualMap residual_gt(const AttractionFieldMap& gt, const AttractionFieldMap& pred);

ResidualMap zero_residual(const GridSpec& spec);

// Container-backed persistence (see grid_io.hpp for the format).
void save_afm(const AttractionFieldMap& afm, const std::string& path);
AttractionFieldMap load_afm(const std::string& path);
void save_residual(const ResidualMap& res, const std::string& path);
ResidualMap load_residual(const std::string& path);

}  // namespace wirefield
