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

#include "wirefield/junction.hpp"

#include <algorithm>
#include <cmath>

#include "wirefield/errors.hpp"
#include "wirefield/grid_io.hpp"

namespace wirefield {

JunctionMaps encode_junctions(const Wireframe& wf, const GridSpec& spec) {
    spec.validate();
    const int B = spec.downsample;
    JunctionMaps maps{spec, Grid<double>(spec.rows(), spec.cols(), 0.0),
                      MultiGrid(2, spec.rows(), spec.cols(), 0.0)};
    // Distance of the kept junction to its bin center, for same-bin ties.
    Grid<double> kept_dist(spec.rows(), spec.cols(), 0.0);

    for (const Point& p : wf.junctions) {
        const int col = static_cast<int>(std::floor(p.x / B));
        const int row = static_cast<int>(std::floor(p.y / B));
        if (!maps.mask.inside(row, col)) continue;  // guards p == width edge cases
        const Point center{(col + 0.5) * B, (row + 0.5) * B};
        const double dist = distance(p, center);
        if (maps.mask.at(row, col) != 0.0 && kept_dist.at(row, col) <= dist) continue;
        maps.mask.at(row, col) = 1.0;
        kept_dist.at(row, col) = dist;
        maps.offset.at(0, row, col) = (p.x - center.x) / B;
        maps.offset.at(1, row, col) = (p.y - center.y) / B;
    }
    return maps;
}

Grid<double> nms3x3(const Grid<double>& mask) {
    Grid<double> out(mask.rows, mask.cols, 0.0);
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            const double v = mask.at(r, c);
            double neighborhood_max = v;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (mask.inside(r + dr, c + dc)) {
                        neighborhood_max = std::max(neighborhood_max, mask.at(r + dr, c + dc));
                    }
                }
            }
            if (v == neighborhood_max) out.at(r, c) = v;
        }
    }
    return out;
}

std::vector<JunctionProposal> decode_junctions(const JunctionMaps& maps, int k, double w) {
    if (k < 1) throw InvariantError("decode_junctions: k must be >= 1");
    maps.spec.validate();
    const int B = maps.spec.downsample;
    if (w <= 0.0) w = static_cast<double>(B);

    const Grid<double> suppressed = nms3x3(maps.mask);
    std::vector<JunctionProposal> peaks;
    for (int r = 0; r < suppressed.rows; ++r) {
        for (int c = 0; c < suppressed.cols; ++c) {
            const double v = suppressed.at(r, c);
            if (v > 0.0) peaks.push_back({{0.0, 0.0}, v, r, c});
        }
    }
    // Row-major scan order already breaks score ties as required.
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const JunctionProposal& a, const JunctionProposal& b) {
                         return a.score > b.score;
                     });
    if (static_cast<int>(peaks.size()) > k) peaks.resize(k);

    const double max_x = static_cast<double>(maps.spec.image_w);
    const double max_y = static_cast<double>(maps.spec.image_h);
    for (JunctionProposal& jp : peaks) {
        const Point center{(jp.col + 0.5) * B, (jp.row + 0.5) * B};
        Point pos{center.x + maps.offset.at(0, jp.row, jp.col) * w,
                  center.y + maps.offset.at(1, jp.row, jp.col) * w};
        pos.x = std::clamp(pos.x, 0.0, std::nextafter(max_x, 0.0));
        pos.y = std::clamp(pos.y, 0.0, std::nextafter(max_y, 0.0));
        jp.position = pos;
    }
    return peaks;
}

void save_junction_maps(const JunctionMaps& maps, const std::string& path) {
    MultiGrid g(3, maps.mask.rows, maps.mask.cols);
    for (int r = 0; r < maps.mask.rows; ++r) {
        for (int c = 0; c < maps.mask.cols; ++c) {
            g.at(0, r, c) = maps.mask.at(r, c);
            g.at(1, r, c) = maps.offset.at(0, r, c);
            g.at(2, r, c) = maps.offset.at(1, r, c);
        }
    }
    write_grid_file(path, maps.spec, g);
}

JunctionMaps load_junction_maps(const std::string& path) {
    GridSpec spec;
    const MultiGrid g = read_grid_file(path, &spec);
    if (g.channels != 3 || g.rows != spec.rows() || g.cols != spec.cols()) {
        throw DataError("not a 3-channel junction map: " + path);
    }
    JunctionMaps maps{spec, Grid<double>(g.rows, g.cols), MultiGrid(2, g.rows, g.cols)};
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            maps.mask.at(r, c) = g.at(0, r, c);
            maps.offset.at(0, r, c) = g.at(1, r, c);
            maps.offset.at(1, r, c) = g.at(2, r, c);
        }
    }
    return maps;
}

}  // namespace wirefield
