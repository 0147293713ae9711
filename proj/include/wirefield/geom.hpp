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

#include <cmath>
#include <optional>

#include "wirefield/errors.hpp"

namespace wirefield {

/// 2-D point in raster axes: x right, y down. Used both for image-pixel
/// and coarse-grid coordinates; the frame is a property of the caller.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Rotation by `angle` (counter-clockwise in the x-right / y-down frame).
inline Point rotate(Point p, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

struct LineSegment {
    Point p1;
    Point p2;
    double length() const { return distance(p1, p2); }
};

/// Implicit line a.x*x + a.y*y + b = 0 with the normal `a` kept at unit
/// length, so |a.p + b| is the perpendicular distance of p to the line.
struct LineCoeffs {
    Point a;
    double b = 0.0;
};

/// Coarse-grid geometry: an image_w x image_h image divided into square
/// bins of side `downsample`, giving a rows() x cols() grid.
struct GridSpec {
    int image_w = 512;
    int image_h = 512;
    int downsample = 4;

    int cols() const { return image_w / downsample; }
    int rows() const { return image_h / downsample; }

    /// Throws InvariantError unless downsample > 0 and divides both dims.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// The local frame of a point p looking at a segment: translate p to the
/// origin, rotate the perpendicular foot onto the +x axis, scale by the
/// perpendicular distance. The segment becomes the vertical line x = 1;
/// `y1` / `y2` are the endpoint heights with the positive one first.
struct CanonicalFrame {
    double d = 0.0;      // perpendicular distance, > 0
    double theta = 0.0;  // attraction direction, in [-pi, pi)
    double y1 = 0.0;     // canonical y of the top endpoint, > 0
    double y2 = 0.0;     // canonical y of the bottom endpoint, <= 0
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Closed-form implicit coefficients of the segment's supporting line.
/// Throws InvariantError on a degenerate (zero-length) segment.
LineCoeffs line_coeffs(const LineSegment& seg);

struct Projection {
    Point foot;       // perpendicular foot on the infinite line
    double t = 0.0;   // unclamped line parameter: foot = p1 + t*(p2-p1)
    double dist = 0.0;  // perpendicular distance to the infinite line
};

/// Orthogonal projection of p onto the segment's supporting line.
Projection project_to_segment(const Point& p, const LineSegment& seg);

/// Canonical frame of p w.r.t. seg, or nullopt ("background") when the
/// point is on the line, the foot falls outside the admissible range
/// (strictly inside on the top-endpoint side, at-or-inside on the bottom
/// side), or the distance is not finite.
std::optional<CanonicalFrame> canonical_frame(const Point& p, const LineSegment& seg);

/// Distance from p to the segment itself: perpendicular distance when the
/// foot lands on the segment, otherwise distance to the nearer endpoint.
double segment_point_distance(const Point& p, const LineSegment& seg);

/// Minimum distance between two segments (0 when they intersect).
double segment_min_distance(const LineSegment& a, const LineSegment& b);

}  // namespace wirefield
