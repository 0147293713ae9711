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

#include <string>
#include <vector>

#include "wirefield/geom.hpp"
#include "wirefield/grid.hpp"
#include "wirefield/scene.hpp"

namespace wirefield {

/// Junction heatmap pair on the coarse grid: a [0,1] mask plus a 2-channel
/// offset map. Offsets are normalized by the bin size and stored so that
/// position = bin_center + offset * w reproduces the junction with w = B;
/// their range is [-1/2, 1/2) per component.
struct JunctionMaps {
    GridSpec spec;
    Grid<double> mask;
    MultiGrid offset;  // 2 channels: x then y
};

/// Decoded junction candidate. `position` is in image pixels; `score` is
/// the mask value at the source bin.
struct JunctionProposal {
    Point position;
    double score = 0.0;
    int row = 0;
    int col = 0;
};

/// Ground-truth maps: the bin containing a junction gets mask 1 and the
/// bin-normalized offset from its center to the junction. When several
/// junctions share a bin only the one nearest the center is kept.
JunctionMaps encode_junctions(const Wireframe& wf, const GridSpec& spec);

/// 3x3 non-maximum suppression: a value survives iff it equals the max of
/// its (clipped) 3x3 neighborhood, so plateaus survive whole.
Grid<double> nms3x3(const Grid<double>& mask);

/// NMS, then the top-k bins by mask value (> 0 only, ties row-major);
/// positions are bin_center + offset * w. Pass w <= 0 to use the bin size.
std::vector<JunctionProposal> decode_junctions(const JunctionMaps& maps, int k, double w = 0.0);

void save_junction_maps(const JunctionMaps& maps, const std::string& path);
JunctionMaps load_junction_maps(const std::string& path);

}  // namespace wirefield
