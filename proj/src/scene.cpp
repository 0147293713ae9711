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

#include "wirefield/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <vector>

#include "wirefield/errors.hpp"
#include "wirefield/rng.hpp"

namespace wirefield {

using nlohmann::json;

namespace {

void check(bool cond, const std::string& what) {
    if (!cond) throw InvariantError(what);
}

}  // namespace

void validate_wireframe(const Wireframe& wf) {
    check(wf.width > 0 && wf.height > 0, "wireframe: width/height must be positive");
    const int nj = static_cast<int>(wf.junctions.size());
    for (int i = 0; i < nj; ++i) {
        const Point& p = wf.junctions[i];
        check(std::isfinite(p.x) && std::isfinite(p.y),
              "junctions[" + std::to_string(i) + "]: non-finite coordinate");
        check(p.x >= 0.0 && p.x < wf.width && p.y >= 0.0 && p.y < wf.height,
              "junctions[" + std::to_string(i) + "]: outside [0,width)x[0,height)");
    }
    for (int i = 0; i < nj; ++i) {
        for (int j = i + 1; j < nj; ++j) {
            check(distance(wf.junctions[i], wf.junctions[j]) > kJunctionDedupTolerance,
                  "junctions[" + std::to_string(j) + "]: duplicate of junctions[" +
                      std::to_string(i) + "]");
        }
    }
    std::vector<char> referenced(wf.junctions.size(), 0);
    for (size_t s = 0; s < wf.segments.size(); ++s) {
        const auto [a, b] = wf.segments[s];
        const std::string path = "segments[" + std::to_string(s) + "]";
        check(a >= 0 && a < nj && b >= 0 && b < nj, path + ": junction index out of range");
        check(a != b, path + ": endpoints reference the same junction");
        referenced[a] = referenced[b] = 1;
    }
    for (int i = 0; i < nj; ++i) {
        check(referenced[i] != 0,
              "junctions[" + std::to_string(i) + "]: not referenced by any segment");
    }
}

void validate_scored_wireframe(const ScoredWireframe& wf) {
    validate_wireframe(wf);
    check(wf.segment_scores.size() == wf.segments.size(),
          "segment_scores: length mismatch with segments");
    check(wf.junction_scores.size() == wf.junctions.size(),
          "junction_scores: length mismatch with junctions");
    for (size_t i = 0; i < wf.segment_scores.size(); ++i) {
        const double s = wf.segment_scores[i];
        check(std::isfinite(s) && s >= 0.0 && s <= 1.0,
              "segment_scores[" + std::to_string(i) + "]: outside [0,1]");
    }
    for (size_t i = 0; i < wf.junction_scores.size(); ++i) {
        const double s = wf.junction_scores[i];
        check(std::isfinite(s) && s >= 0.0 && s <= 1.0,
              "junction_scores[" + std::to_string(i) + "]: outside [0,1]");
    }
}

namespace {

json parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path);
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return doc;
}

ScoredWireframe wireframe_from_json(const json& doc, const std::string& path) {
    ScoredWireframe wf;
    try {
        wf.width = doc.at("width").get<int>();
        wf.height = doc.at("height").get<int>();
        for (const auto& j : doc.at("junctions")) {
            wf.junctions.push_back({j.at(0).get<double>(), j.at(1).get<double>()});
        }
        for (const auto& s : doc.at("segments")) {
            wf.segments.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
        }
        if (doc.contains("segment_scores")) {
            wf.segment_scores = doc["segment_scores"].get<std::vector<double>>();
        } else {
            wf.segment_scores.assign(wf.segments.size(), 1.0);
        }
        if (doc.contains("junction_scores")) {
            wf.junction_scores = doc["junction_scores"].get<std::vector<double>>();
        } else {
            wf.junction_scores.assign(wf.junctions.size(), 1.0);
        }
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return wf;
}

}  // namespace

Wireframe load_wireframe(const std::string& path) {
    ScoredWireframe wf = wireframe_from_json(parse_file(path), path);
    validate_wireframe(wf);
    return wf;
}

ScoredWireframe load_scored_wireframe(const std::string& path) {
    ScoredWireframe wf = wireframe_from_json(parse_file(path), path);
    validate_scored_wireframe(wf);
    return wf;
}

void save_wireframe(const ScoredWireframe& wf, const std::string& path) {
    validate_scored_wireframe(wf);
    json doc;
    doc["width"] = wf.width;
    doc["height"] = wf.height;
    json junctions = json::array();
    for (const Point& p : wf.junctions) junctions.push_back({p.x, p.y});
    doc["junctions"] = std::move(junctions);
    json segments = json::array();
    for (const auto& [a, b] : wf.segments) segments.push_back({a, b});
    doc["segments"] = std::move(segments);
    doc["segment_scores"] = wf.segment_scores;
    doc["junction_scores"] = wf.junction_scores;
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << doc.dump(2) << '\n';
    if (!os) throw DataError("write failed: " + path);
}

void save_wireframe(const Wireframe& wf, const std::string& path) {
    ScoredWireframe scored;
    static_cast<Wireframe&>(scored) = wf;
    scored.segment_scores.assign(wf.segments.size(), 1.0);
    scored.junction_scores.assign(wf.junctions.size(), 1.0);
    save_wireframe(scored, path);
}

namespace {

// Minimum angle between segments sharing a junction; keeps shared-endpoint
// pairs from lying on top of each other.
constexpr double kAdjacentMinAngle = 0.35;  // rad, ~20 deg

double angle_between(Point u, Point v) {
    const double nu = norm(u), nv = norm(v);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

}  // namespace

Wireframe synth_scene(uint64_t seed, const GridSpec& spec, int n_segments, double min_len,
                      double min_separation, double share_prob) {
    spec.validate();
    if (n_segments < 1) throw InvariantError("synth_scene: n_segments must be >= 1");
    if (min_len <= 0.0 || min_separation < 0.0) {
        throw InvariantError("synth_scene: min_len must be positive, min_separation >= 0");
    }
    const double w = spec.image_w;
    const double h = spec.image_h;
    const double margin = std::max(1.0, min_separation * 0.5);
    if (min_len > std::hypot(w - 2 * margin, h - 2 * margin)) {
        throw InvariantError("synth_scene: min_len exceeds image diagonal");
    }

    Rng rng(seed);
    Wireframe wf;
    wf.width = spec.image_w;
    wf.height = spec.image_h;

    auto sample_point = [&] {
        return Point{rng.uniform(margin, w - margin), rng.uniform(margin, h - margin)};
    };
    // Bounded lengths keep dense scenes packable.
    const double max_len = 2.5 * min_len;
    auto sample_other_end = [&](const Point& from) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double len = rng.uniform(min_len, max_len);
        return Point{from.x + len * std::cos(angle), from.y + len * std::sin(angle)};
    };
    auto in_bounds = [&](const Point& p) {
        return p.x >= margin && p.x < w - margin && p.y >= margin && p.y < h - margin;
    };

    const long max_attempts = 2000L * n_segments + 2000;
    long attempts = 0;
    while (static_cast<int>(wf.segments.size()) < n_segments) {
        if (++attempts > max_attempts) {
            throw InvariantError("synth_scene: infeasible request, retry budget exhausted");
        }

        int shared = -1;
        Point a;
        if (!wf.junctions.empty() && rng.bernoulli(share_prob)) {
            shared = static_cast<int>(rng.uniform_index(wf.junctions.size()));
            a = wf.junctions[shared];
        } else {
            a = sample_point();
        }
        const Point b = sample_other_end(a);
        if (!in_bounds(b)) continue;
        const LineSegment cand{a, b};
        if (cand.length() < min_len) continue;

        // Fresh endpoints keep their distance from every existing junction
        // so bins stay unique downstream.
        bool ok = true;
        for (size_t j = 0; j < wf.junctions.size() && ok; ++j) {
            if (shared < 0 && distance(a, wf.junctions[j]) < min_separation) ok = false;
            if (distance(b, wf.junctions[j]) < min_separation) ok = false;
        }
        if (!ok) continue;

        for (size_t s = 0; s < wf.segments.size() && ok; ++s) {
            const auto [ja, jb] = wf.segments[s];
            const LineSegment other = wf.segment_geometry(static_cast<int>(s));
            const bool adjacent = shared >= 0 && (ja == shared || jb == shared);
            if (adjacent) {
                const Point pivot = wf.junctions[shared];
                const Point other_far = (ja == shared) ? other.p2 : other.p1;
                if (angle_between(b - pivot, other_far - pivot) < kAdjacentMinAngle) ok = false;
            } else if (segment_min_distance(cand, other) < min_separation) {
                ok = false;
            }
        }
        if (!ok) continue;

        const int ia = (shared >= 0) ? shared : static_cast<int>(wf.junctions.size());
        if (shared < 0) wf.junctions.push_back(a);
        const int ib = static_cast<int>(wf.junctions.size());
        wf.junctions.push_back(b);
        wf.segments.emplace_back(ia, ib);
    }

    validate_wireframe(wf);
    return wf;
}

Wireframe to_coarse(const Wireframe& wf, const GridSpec& spec) {
    spec.validate();
    Wireframe out;
    out.width = spec.cols();
    out.height = spec.rows();
    out.junctions.reserve(wf.junctions.size());
    const double inv = 1.0 / spec.downsample;
    for (const Point& p : wf.junctions) out.junctions.push_back({p.x * inv, p.y * inv});
    out.segments = wf.segments;
    return out;
}

}  // namespace wirefield
