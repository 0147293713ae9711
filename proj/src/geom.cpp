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

#include "wirefield/geom.hpp"

#include <algorithm>
#include <cmath>

namespace wirefield {

void GridSpec::validate() const {
    if (downsample <= 0) {
        throw InvariantError("grid spec: downsample must be positive");
    }
    if (image_w <= 0 || image_h <= 0) {
        throw InvariantError("grid spec: image dimensions must be positive");
    }
    if (image_w % downsample != 0 || image_h % downsample != 0) {
        throw InvariantError("grid spec: downsample must divide both image dimensions");
    }
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);  // lands in [-pi, pi]
    if (a >= M_PI) a = -M_PI;
    return a;
}

LineCoeffs line_coeffs(const LineSegment& seg) {
    const Point dir = seg.p2 - seg.p1;
    const double len = norm(dir);
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw InvariantError("line_coeffs: degenerate segment");
    }
    const Point a{-dir.y / len, dir.x / len};
    return {a, -dot(a, seg.p1)};
}

Projection project_to_segment(const Point& p, const LineSegment& seg) {
    const Point dir = seg.p2 - seg.p1;
    const double len2 = dot(dir, dir);
    if (!(len2 > 0.0)) {
        throw InvariantError("project_to_segment: degenerate segment");
    }
    const double t = dot(p - seg.p1, dir) / len2;
    const Point foot = seg.p1 + t * dir;
    const LineCoeffs lc = line_coeffs(seg);
    return {foot, t, std::abs(dot(lc.a, p) + lc.b)};
}

std::optional<CanonicalFrame> canonical_frame(const Point& p, const LineSegment& seg) {
    const Projection proj = project_to_segment(p, seg);
    const double d = proj.dist;
    if (!(d > 0.0) || !std::isfinite(d)) {
        return std::nullopt;
    }
    const Point v = (1.0 / d) * (proj.foot - p);
    const double theta = wrap_angle(std::atan2(v.y, v.x));

    // q -> R(-theta) * (q - p) / d maps the foot to (1, 0) and the segment
    // onto the vertical line x = 1; only the endpoint heights matter here.
    const Point e1 = (1.0 / d) * rotate(seg.p1 - p, -theta);
    const Point e2 = (1.0 / d) * rotate(seg.p2 - p, -theta);
    const double y_top = std::max(e1.y, e2.y);
    const double y_bot = std::min(e1.y, e2.y);

    // Foot strictly below the top endpoint, at or above the bottom one;
    // anything else (including the foot sitting on the top endpoint) is
    // background.
    if (!(y_top > 0.0) || !(y_bot <= 0.0)) {
        return std::nullopt;
    }
    return CanonicalFrame{d, theta, y_top, y_bot};
}

double segment_point_distance(const Point& p, const LineSegment& seg) {
    const Point dir = seg.p2 - seg.p1;
    const double len2 = dot(dir, dir);
    if (!(len2 > 0.0)) {
        return distance(p, seg.p1);
    }
    const double t = std::clamp(dot(p - seg.p1, dir) / len2, 0.0, 1.0);
    return distance(p, seg.p1 + t * dir);
}

namespace {

// Proper intersection test via orientation signs.
double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(const LineSegment& a, const LineSegment& b) {
    const double d1 = cross(b.p1, b.p2, a.p1);
    const double d2 = cross(b.p1, b.p2, a.p2);
    const double d3 = cross(a.p1, a.p2, b.p1);
    const double d4 = cross(a.p1, a.p2, b.p2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    return false;  // collinear touching handled by the endpoint distances
}

}  // namespace

double segment_min_distance(const LineSegment& a, const LineSegment& b) {
    if (segments_intersect(a, b)) return 0.0;
    double d = segment_point_distance(a.p1, b);
    d = std::min(d, segment_point_distance(a.p2, b));
    d = std::min(d, segment_point_distance(b.p1, a));
    d = std::min(d, segment_point_distance(b.p2, a));
    return d;
}

}  // namespace wirefield
