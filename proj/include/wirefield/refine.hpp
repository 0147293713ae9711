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

#include <vector>

#include "wirefield/hafm.hpp"
#include "wirefield/junction.hpp"

namespace wirefield {

struct MatchConfig {
    double tau = 10.0;  // endpoint-to-junction matching radius, coarse px
    void validate() const {
        if (!(tau > 0.0)) throw InvariantError("match config: tau must be positive");
    }
};

/// Line and junction proposals moving through refinement and verification.
/// Segment geometry is in coarse px, junction positions in image px.
struct ProposalSet {
    GridSpec spec;
    std::vector<LineProposal> segments;
    std::vector<JunctionProposal> junctions;
};

/// Couples segments to junctions: each endpoint matches its nearest
/// junction proposal (measured on the coarse grid); a segment survives iff
/// both endpoints match within tau to two distinct junctions. Surviving
/// endpoints snap to the matched junction positions, segments reducing to
/// the same junction pair are merged (smallest total endpoint displacement
/// wins), and junctions supporting no segment are dropped.
ProposalSet match(const ProposalSet& proposals, const MatchConfig& cfg);

}  // namespace wirefield
