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

#include "wirefield/refine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

namespace wirefield {

namespace {

struct EndpointMatch {
    int junction = -1;
    double dist = std::numeric_limits<double>::infinity();
};

EndpointMatch nearest_junction(const Point& p, const std::vector<Point>& coarse_junctions) {
    EndpointMatch m;
    for (size_t j = 0; j < coarse_junctions.size(); ++j) {
        const double d = distance(p, coarse_junctions[j]);
        if (d < m.dist) {
            m.junction = static_cast<int>(j);
            m.dist = d;
        }
    }
    return m;
}

}  // namespace

ProposalSet match(const ProposalSet& proposals, const MatchConfig& cfg) {
    cfg.validate();
    proposals.spec.validate();

    std::vector<Point> coarse_junctions;
    coarse_junctions.reserve(proposals.junctions.size());
    const double inv = 1.0 / proposals.spec.downsample;
    for (const JunctionProposal& jp : proposals.junctions) {
        coarse_junctions.push_back({jp.position.x * inv, jp.position.y * inv});
    }

    // Best surviving representative per unordered junction pair.
    std::map<std::pair<int, int>, std::pair<LineProposal, double>> by_pair;
    for (const LineProposal& lp : proposals.segments) {
        const EndpointMatch m1 = nearest_junction(lp.seg.p1, coarse_junctions);
        const EndpointMatch m2 = nearest_junction(lp.seg.p2, coarse_junctions);
        if (m1.junction < 0 || m2.junction < 0) continue;
        if (m1.dist > cfg.tau || m2.dist > cfg.tau) continue;
        if (m1.junction == m2.junction) continue;

        LineProposal snapped = lp;
        snapped.seg.p1 = coarse_junctions[m1.junction];
        snapped.seg.p2 = coarse_junctions[m2.junction];
        snapped.junction_a = m1.junction;
        snapped.junction_b = m2.junction;

        const auto key = std::minmax(m1.junction, m2.junction);
        const double displacement = m1.dist + m2.dist;
        auto it = by_pair.find(key);
        if (it == by_pair.end()) {
            by_pair.emplace(key, std::make_pair(snapped, displacement));
        } else if (displacement < it->second.second) {
            it->second = {snapped, displacement};
        }
    }

    // Keep only junctions that support a surviving segment; reindex.
    std::vector<int> remap(proposals.junctions.size(), -1);
    ProposalSet out;
    out.spec = proposals.spec;
    for (const auto& [key, value] : by_pair) {
        for (int j : {key.first, key.second}) {
            if (remap[j] < 0) {
                remap[j] = static_cast<int>(out.junctions.size());
                out.junctions.push_back(proposals.junctions[j]);
            }
        }
        LineProposal lp = value.first;
        lp.junction_a = remap[lp.junction_a];
        lp.junction_b = remap[lp.junction_b];
        out.segments.push_back(lp);
    }
    return out;
}

}  // namespace wirefield
