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

#include "wirefield/hafm.hpp"

#include <cmath>

#include "wirefield/errors.hpp"
#include "wirefield/grid_io.hpp"

namespace wirefield {

namespace {

std::vector<LineSegment> coarse_segments(const Wireframe& wf, const GridSpec& spec) {
    std::vector<LineSegment> segs;
    segs.reserve(wf.segments.size());
    const double inv = 1.0 / spec.downsample;
    for (size_t i = 0; i < wf.segments.size(); ++i) {
        const LineSegment s = wf.segment_geometry(static_cast<int>(i));
        segs.push_back({{s.p1.x * inv, s.p1.y * inv}, {s.p2.x * inv, s.p2.y * inv}});
    }
    return segs;
}

}  // namespace

Grid<int> assign_support(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg) {
    spec.validate();
    cfg.validate();
    const std::vector<LineSegment> segs = coarse_segments(wf, spec);
    Grid<int> support(spec.rows(), spec.cols(), -1);
    if (segs.empty()) return support;

    for (int r = 0; r < support.rows; ++r) {
        for (int c = 0; c < support.cols; ++c) {
            const Point px = bin_center(r, c);
            int best = -1;
            double best_d = 0.0;
            for (size_t i = 0; i < segs.size(); ++i) {
                const double d = segment_point_distance(px, segs[i]);
                if (best < 0 || d < best_d) {
                    best = static_cast<int>(i);
                    best_d = d;
                }
            }
            // The winner keeps the pixel only if it induces a valid frame
            // within range; the pixel is never handed to the runner-up.
            // Distances below kMinSupportDistance count as "on the
            // segment": the endpoint angles saturate toward +-pi/2 there
            // and the closed-form inverse loses the endpoints.
            const auto frame = canonical_frame(px, segs[best]);
            if (frame && frame->d >= kMinSupportDistance && frame->d <= cfg.d_max) {
                support.at(r, c) = best;
            }
        }
    }
    return support;
}

std::array<double, 4> normalize_sample(const AttractionSample& s, const CodecConfig& cfg) {
    return {s.d / cfg.d_max, s.theta / (2.0 * M_PI) + 0.5, 2.0 * s.theta1 / M_PI,
            -2.0 * s.theta2 / M_PI};
}

AttractionSample denormalize_sample(const std::array<double, 4>& ch, const CodecConfig& cfg) {
    return {ch[0] * cfg.d_max, (ch[1] - 0.5) * (2.0 * M_PI), ch[2] * (M_PI / 2.0),
            -ch[3] * (M_PI / 2.0)};
}

AttractionFieldMap encode(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg) {
    const Grid<int> support = assign_support(wf, spec, cfg);
    const std::vector<LineSegment> segs = coarse_segments(wf, spec);

    AttractionFieldMap afm{spec, MultiGrid(4, spec.rows(), spec.cols())};
    for (int r = 0; r < support.rows; ++r) {
        for (int c = 0; c < support.cols; ++c) {
            std::array<double, 4> ch = kBackgroundSample;
            const int idx = support.at(r, c);
            if (idx >= 0) {
                const auto frame = canonical_frame(bin_center(r, c), segs[idx]);
                const AttractionSample s{frame->d, frame->theta, std::atan(frame->y1),
                                         std::atan(frame->y2)};
                ch = normalize_sample(s, cfg);
            }
            for (int k = 0; k < 4; ++k) afm.channels.at(k, r, c) = ch[k];
        }
    }
    return afm;
}

LineSegment decode_pixel(const Point& px, const AttractionSample& s) {
    const Point e1 = px + s.d * rotate({1.0, std::tan(s.theta1)}, s.theta);
    const Point e2 = px + s.d * rotate({1.0, std::tan(s.theta2)}, s.theta);
    return {e1, e2};
}

std::vector<LineProposal> decode(const AttractionFieldMap& afm, const ResidualMap* residual,
                                 const CodecConfig& cfg) {
    cfg.validate();
    if (residual && !(residual->spec == afm.spec)) {
        throw InvariantError("decode: residual map spec mismatch");
    }
    std::vector<LineProposal> out;
    const int rows = afm.spec.rows();
    const int cols = afm.spec.cols();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (afm.is_background(r, c)) continue;
            const std::array<double, 4> ch = {afm.channels.at(0, r, c), afm.channels.at(1, r, c),
                                              afm.channels.at(2, r, c), afm.channels.at(3, r, c)};
            const double d_norm = ch[0];
            const double res_norm = residual ? residual->values.at(r, c) : 0.0;

            // Candidate distances stay in normalized units until a segment
            // is actually emitted, so an exact residual reproduces the
            // ground-truth channel value bit for bit.
            double candidates[3];
            int n = 0;
            if (res_norm == 0.0) {
                candidates[n++] = d_norm;
            } else {
                candidates[n++] = d_norm - res_norm;
                candidates[n++] = d_norm;
                candidates[n++] = d_norm + res_norm;
            }
            for (int i = 0; i < n; ++i) {
                const double cand = candidates[i];
                if (!(cand > 0.0) || !(cand <= 1.0)) continue;
                const AttractionSample s =
                    denormalize_sample({cand, ch[1], ch[2], ch[3]}, cfg);
                out.push_back({decode_pixel(bin_center(r, c), s), r, c, 0.0, -1, -1});
            }
        }
    }
    return out;
}

SixDFieldMap encode_6d(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg) {
    const Grid<int> support = assign_support(wf, spec, cfg);
    const std::vector<LineSegment> segs = coarse_segments(wf, spec);

    SixDFieldMap map{spec, {}};
    map.cells.assign(static_cast<size_t>(spec.rows()) * spec.cols(), std::nullopt);
    for (int r = 0; r < support.rows; ++r) {
        for (int c = 0; c < support.cols; ++c) {
            const int idx = support.at(r, c);
            if (idx < 0) continue;
            const Point px = bin_center(r, c);
            const auto frame = canonical_frame(px, segs[idx]);
            const Projection proj = project_to_segment(px, segs[idx]);
            // Order endpoints to match the canonical labeling (top first).
            const Point c1 = (1.0 / frame->d) * rotate(segs[idx].p1 - px, -frame->theta);
            const bool p1_top = c1.y > 0.0;
            const Point top = p1_top ? segs[idx].p1 : segs[idx].p2;
            const Point bot = p1_top ? segs[idx].p2 : segs[idx].p1;
            map.at(r, c) = SixDSample{proj.foot - px, top - px, bot - px};
        }
    }
    return map;
}

std::vector<LineProposal> decode_6d(const SixDFieldMap& map) {
    std::vector<LineProposal> out;
    const int rows = map.spec.rows();
    const int cols = map.spec.cols();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto& cell = map.at(r, c);
            if (!cell) continue;
            const Point px = bin_center(r, c);
            out.push_back({{px + cell->v1, px + cell->v2}, r, c, 0.0, -1, -1});
        }
    }
    return out;
}

ResidualMap residual_gt(const AttractionFieldMap& gt, const AttractionFieldMap& pred) {
    if (!(gt.spec == pred.spec)) throw InvariantError("residual_gt: spec mismatch");
    ResidualMap res{gt.spec, Grid<double>(gt.spec.rows(), gt.spec.cols(), 0.0)};
    for (int r = 0; r < res.values.rows; ++r) {
        for (int c = 0; c < res.values.cols; ++c) {
            if (gt.is_background(r, c) || pred.is_background(r, c)) continue;
            res.values.at(r, c) = std::abs(gt.channels.at(0, r, c) - pred.channels.at(0, r, c));
        }
    }
    return res;
}

ResidualMap zero_residual(const GridSpec& spec) {
    return {spec, Grid<double>(spec.rows(), spec.cols(), 0.0)};
}

void save_afm(const AttractionFieldMap& afm, const std::string& path) {
    write_grid_file(path, afm.spec, afm.channels);
}

AttractionFieldMap load_afm(const std::string& path) {
    AttractionFieldMap afm;
    afm.channels = read_grid_file(path, &afm.spec);
    if (afm.channels.channels != 4 || afm.channels.rows != afm.spec.rows() ||
        afm.channels.cols != afm.spec.cols()) {
        throw DataError("not a 4-channel field map: " + path);
    }
    return afm;
}

void save_residual(const ResidualMap& res, const std::string& path) {
    MultiGrid g(1, res.values.rows, res.values.cols);
    g.v = res.values.v;
    write_grid_file(path, res.spec, g);
}

ResidualMap load_residual(const std::string& path) {
    ResidualMap res;
    const MultiGrid g = read_grid_file(path, &res.spec);
    if (g.channels != 1 || g.rows != res.spec.rows() || g.cols != res.spec.cols()) {
        throw DataError("not a 1-channel residual map: " + path);
    }
    res.values = Grid<double>(g.rows, g.cols);
    res.values.v = g.v;
    return res;
}

}  // namespace wirefield
