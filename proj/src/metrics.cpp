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

#include "wirefield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "wirefield/errors.hpp"

namespace wirefield {

void MetricConfig::validate() const {
    auto check_ascending = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw InvariantError(std::string(name) + ": empty threshold list");
        double prev = 0.0;
        for (double t : v) {
            if (!(t > prev)) {
                throw InvariantError(std::string(name) + ": thresholds must be positive ascending");
            }
            prev = t;
        }
    };
    check_ascending(sap_thresholds, "sap_thresholds");
    check_ascending(junc_thresholds, "junc_thresholds");
    if (eval_w < 1 || eval_h < 1) throw InvariantError("eval resolution must be positive");
    if (!(heatmap_tolerance > 0.0)) throw InvariantError("heatmap_tolerance must be positive");
    if (heatmap_threshold_count < 1) throw InvariantError("heatmap_threshold_count must be >= 1");
}

namespace {

double sq(double x) { return x * x; }

// Eq.-style overlap: smaller of the two endpoint pairings' summed squared
// distances.
double segment_overlap_cost(const LineSegment& gt, const LineSegment& pred) {
    const double straight = sq(gt.p1.x - pred.p1.x) + sq(gt.p1.y - pred.p1.y) +
                            sq(gt.p2.x - pred.p2.x) + sq(gt.p2.y - pred.p2.y);
    const double crossed = sq(gt.p1.x - pred.p2.x) + sq(gt.p1.y - pred.p2.y) +
                           sq(gt.p2.x - pred.p1.x) + sq(gt.p2.y - pred.p1.y);
    return std::min(straight, crossed);
}

struct RankedSegment {
    double score;
    int image;
    LineSegment seg;  // eval-resolution coordinates
};

struct RankedPoint {
    double score;
    int image;
    Point p;
};

Point scale_point(Point p, double sx, double sy) { return {p.x * sx, p.y * sy}; }

// Accumulates the rectangle-rule AP over the ranked claim sweep shared by
// the segment and junction metrics.
template <typename Candidate, typename ClaimFn>
std::pair<double, std::vector<PrPoint>> ranked_ap(std::vector<Candidate>& ranked, long total_gt,
                                                  ClaimFn&& try_claim) {
    std::vector<PrPoint> curve;
    curve.reserve(ranked.size());
    double ap = 0.0;
    double prev_recall = 0.0;
    long tp = 0;
    long fp = 0;
    for (const Candidate& cand : ranked) {
        if (try_claim(cand)) {
            ++tp;
        } else {
            ++fp;
        }
        const double recall = total_gt > 0 ? static_cast<double>(tp) / total_gt : 0.0;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        if (recall > prev_recall) {
            ap += (recall - prev_recall) * precision;
            prev_recall = recall;
        }
        curve.push_back({cand.score, tp, fp, recall, precision});
    }
    return {ap, std::move(curve)};
}

}  // namespace

std::pair<double, std::vector<PrPoint>> sap(const std::vector<ScoredWireframe>& predictions,
                                            const std::vector<Wireframe>& gts, double threshold,
                                            const MetricConfig& cfg) {
    cfg.validate();
    if (predictions.size() != gts.size()) throw InvariantError("sap: dataset length mismatch");

    std::vector<RankedSegment> ranked;
    std::vector<std::vector<LineSegment>> gt_segments(gts.size());
    std::vector<std::vector<char>> claimed(gts.size());
    long total_gt = 0;
    for (size_t i = 0; i < gts.size(); ++i) {
        const double gsx = static_cast<double>(cfg.eval_w) / gts[i].width;
        const double gsy = static_cast<double>(cfg.eval_h) / gts[i].height;
        for (size_t s = 0; s < gts[i].segments.size(); ++s) {
            const LineSegment seg = gts[i].segment_geometry(static_cast<int>(s));
            gt_segments[i].push_back(
                {scale_point(seg.p1, gsx, gsy), scale_point(seg.p2, gsx, gsy)});
        }
        claimed[i].assign(gts[i].segments.size(), 0);
        total_gt += static_cast<long>(gts[i].segments.size());

        const double psx = static_cast<double>(cfg.eval_w) / predictions[i].width;
        const double psy = static_cast<double>(cfg.eval_h) / predictions[i].height;
        for (size_t s = 0; s < predictions[i].segments.size(); ++s) {
            const LineSegment seg = predictions[i].segment_geometry(static_cast<int>(s));
            ranked.push_back({predictions[i].segment_scores[s], static_cast<int>(i),
                              {scale_point(seg.p1, psx, psy), scale_point(seg.p2, psx, psy)}});
        }
    }

    // Content-based ordering so the result is invariant to input shuffles.
    std::sort(ranked.begin(), ranked.end(), [](const RankedSegment& a, const RankedSegment& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.image, a.seg.p1.x, a.seg.p1.y, a.seg.p2.x, a.seg.p2.y) <
               std::tie(b.image, b.seg.p1.x, b.seg.p1.y, b.seg.p2.x, b.seg.p2.y);
    });

    auto try_claim = [&](const RankedSegment& cand) {
        const std::vector<LineSegment>& gt = gt_segments[cand.image];
        int best = -1;
        double best_cost = 0.0;
        for (size_t g = 0; g < gt.size(); ++g) {
            if (claimed[cand.image][g]) continue;
            const double cost = segment_overlap_cost(gt[g], cand.seg);
            if (best < 0 || cost < best_cost) {
                best = static_cast<int>(g);
                best_cost = cost;
            }
        }
        if (best >= 0 && best_cost <= threshold) {
            claimed[cand.image][best] = 1;
            return true;
        }
        return false;
    };
    return ranked_ap(ranked, total_gt, try_claim);
}

double msap(const std::vector<ScoredWireframe>& predictions, const std::vector<Wireframe>& gts,
            const MetricConfig& cfg) {
    cfg.validate();
    double sum = 0.0;
    for (double t : cfg.sap_thresholds) sum += sap(predictions, gts, t, cfg).first;
    return sum / static_cast<double>(cfg.sap_thresholds.size());
}

namespace {

std::pair<double, std::vector<PrPoint>> junction_ap(
    const std::vector<ScoredWireframe>& predictions, const std::vector<Wireframe>& gts,
    double threshold, const MetricConfig& cfg) {
    std::vector<RankedPoint> ranked;
    std::vector<std::vector<Point>> gt_points(gts.size());
    std::vector<std::vector<char>> claimed(gts.size());
    long total_gt = 0;
    for (size_t i = 0; i < gts.size(); ++i) {
        const double gsx = static_cast<double>(cfg.eval_w) / gts[i].width;
        const double gsy = static_cast<double>(cfg.eval_h) / gts[i].height;
        for (const Point& p : gts[i].junctions) gt_points[i].push_back(scale_point(p, gsx, gsy));
        claimed[i].assign(gts[i].junctions.size(), 0);
        total_gt += static_cast<long>(gts[i].junctions.size());

        const double psx = static_cast<double>(cfg.eval_w) / predictions[i].width;
        const double psy = static_cast<double>(cfg.eval_h) / predictions[i].height;
        for (size_t j = 0; j < predictions[i].junctions.size(); ++j) {
            ranked.push_back({predictions[i].junction_scores[j], static_cast<int>(i),
                              scale_point(predictions[i].junctions[j], psx, psy)});
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedPoint& a, const RankedPoint& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.image, a.p.x, a.p.y) < std::tie(b.image, b.p.x, b.p.y);
    });

    auto try_claim = [&](const RankedPoint& cand) {
        const std::vector<Point>& gt = gt_points[cand.image];
        int best = -1;
        double best_dist = 0.0;
        for (size_t g = 0; g < gt.size(); ++g) {
            if (claimed[cand.image][g]) continue;
            const double d = distance(gt[g], cand.p);
            if (best < 0 || d < best_dist) {
                best = static_cast<int>(g);
                best_dist = d;
            }
        }
        if (best >= 0 && best_dist <= threshold) {
            claimed[cand.image][best] = 1;
            return true;
        }
        return false;
    };
    return ranked_ap(ranked, total_gt, try_claim);
}

}  // namespace

double mapj(const std::vector<ScoredWireframe>& predictions, const std::vector<Wireframe>& gts,
            const MetricConfig& cfg) {
    cfg.validate();
    if (predictions.size() != gts.size()) throw InvariantError("mapj: dataset length mismatch");
    double sum = 0.0;
    for (double t : cfg.junc_thresholds) {
        sum += junction_ap(predictions, gts, t, cfg).first;
    }
    return sum / static_cast<double>(cfg.junc_thresholds.size());
}

std::vector<std::pair<int, int>> rasterize_segment(Point a, Point b, int grid_w, int grid_h) {
    auto clamp_x = [&](long v) { return static_cast<int>(std::clamp<long>(v, 0, grid_w - 1)); };
    auto clamp_y = [&](long v) { return static_cast<int>(std::clamp<long>(v, 0, grid_h - 1)); };
    int x0 = clamp_x(std::lround(a.x));
    int y0 = clamp_y(std::lround(a.y));
    const int x1 = clamp_x(std::lround(b.x));
    const int y1 = clamp_y(std::lround(b.y));

    std::vector<std::pair<int, int>> pixels;
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        pixels.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return pixels;
}

namespace {

using PixelSet = std::vector<std::pair<int, int>>;  // sorted unique

PixelSet rasterize_scene(const std::vector<LineSegment>& segments, int w, int h) {
    std::set<std::pair<int, int>> px;
    for (const LineSegment& seg : segments) {
        for (const auto& p : rasterize_segment(seg.p1, seg.p2, w, h)) px.insert(p);
    }
    return {px.begin(), px.end()};
}

struct PixelMatchStats {
    long matched = 0;
    long n_pred = 0;
    long n_gt = 0;
};

// Greedy ascending-distance one-to-one matching within the tolerance.
PixelMatchStats match_pixels(const PixelSet& pred, const PixelSet& gt, double tol) {
    PixelMatchStats stats;
    stats.n_pred = static_cast<long>(pred.size());
    stats.n_gt = static_cast<long>(gt.size());
    if (pred.empty() || gt.empty()) return stats;

    const int radius = static_cast<int>(std::floor(tol));
    const double tol2 = tol * tol;
    std::set<std::pair<int, int>> gt_index(gt.begin(), gt.end());

    // (squared distance, pred index, gt pixel)
    std::vector<std::tuple<int, size_t, std::pair<int, int>>> pairs;
    for (size_t i = 0; i < pred.size(); ++i) {
        for (int dx = -radius; dx <= radius; ++dx) {
            for (int dy = -radius; dy <= radius; ++dy) {
                const double d2 = dx * dx + dy * dy;
                if (d2 > tol2) continue;
                const std::pair<int, int> cand{pred[i].first + dx, pred[i].second + dy};
                if (gt_index.count(cand)) pairs.emplace_back(dx * dx + dy * dy, i, cand);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());

    std::vector<char> pred_used(pred.size(), 0);
    std::set<std::pair<int, int>> gt_used;
    for (const auto& [d2, pi, gp] : pairs) {
        if (pred_used[pi] || gt_used.count(gp)) continue;
        pred_used[pi] = 1;
        gt_used.insert(gp);
        ++stats.matched;
    }
    return stats;
}

}  // namespace

HeatmapResult heatmap_metrics(const std::vector<ScoredWireframe>& predictions,
                              const std::vector<Wireframe>& gts, const MetricConfig& cfg) {
    cfg.validate();
    if (predictions.size() != gts.size()) {
        throw InvariantError("heatmap_metrics: dataset length mismatch");
    }

    // Per-image rescaled geometry; ground-truth pixels never change over
    // the threshold sweep.
    std::vector<PixelSet> gt_pixels(gts.size());
    std::vector<std::vector<std::pair<double, LineSegment>>> pred_segments(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) {
        const double gsx = static_cast<double>(cfg.eval_w) / gts[i].width;
        const double gsy = static_cast<double>(cfg.eval_h) / gts[i].height;
        std::vector<LineSegment> scaled;
        for (size_t s = 0; s < gts[i].segments.size(); ++s) {
            const LineSegment seg = gts[i].segment_geometry(static_cast<int>(s));
            scaled.push_back({scale_point(seg.p1, gsx, gsy), scale_point(seg.p2, gsx, gsy)});
        }
        gt_pixels[i] = rasterize_scene(scaled, cfg.eval_w, cfg.eval_h);

        const double psx = static_cast<double>(cfg.eval_w) / predictions[i].width;
        const double psy = static_cast<double>(cfg.eval_h) / predictions[i].height;
        for (size_t s = 0; s < predictions[i].segments.size(); ++s) {
            const LineSegment seg = predictions[i].segment_geometry(static_cast<int>(s));
            pred_segments[i].emplace_back(
                predictions[i].segment_scores[s],
                LineSegment{scale_point(seg.p1, psx, psy), scale_point(seg.p2, psx, psy)});
        }
    }

    HeatmapResult result;
    for (int step = 1; step <= cfg.heatmap_threshold_count; ++step) {
        const double threshold =
            static_cast<double>(step) / (cfg.heatmap_threshold_count + 1);
        long matched = 0;
        long n_pred = 0;
        long n_gt = 0;
        for (size_t i = 0; i < gts.size(); ++i) {
            std::vector<LineSegment> kept;
            for (const auto& [score, seg] : pred_segments[i]) {
                if (score >= threshold) kept.push_back(seg);
            }
            const PixelSet pred = rasterize_scene(kept, cfg.eval_w, cfg.eval_h);
            const PixelMatchStats stats =
                match_pixels(pred, gt_pixels[i], cfg.heatmap_tolerance);
            matched += stats.matched;
            n_pred += stats.n_pred;
            n_gt += stats.n_gt;
        }
        const double precision = n_pred > 0 ? static_cast<double>(matched) / n_pred : 0.0;
        const double recall = n_gt > 0 ? static_cast<double>(matched) / n_gt : 0.0;
        result.curve.push_back({threshold, matched, n_pred - matched, recall, precision});
        if (precision + recall > 0.0) {
            result.fh = std::max(result.fh, 2.0 * precision * recall / (precision + recall));
        }
    }

    // Area under the swept polyline, closed on the left with the precision
    // of the lowest-recall point.
    std::vector<PrPoint> by_recall = result.curve;
    std::sort(by_recall.begin(), by_recall.end(),
              [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
    double prev_r = 0.0;
    double prev_p = by_recall.empty() ? 0.0 : by_recall.front().precision;
    double area = 0.0;
    for (const PrPoint& pt : by_recall) {
        area += (pt.recall - prev_r) * 0.5 * (pt.precision + prev_p);
        prev_r = pt.recall;
        prev_p = pt.precision;
    }
    result.aph = area;
    return result;
}

EvalReport evaluate(const std::vector<ScoredWireframe>& predictions,
                    const std::vector<Wireframe>& gts, const MetricConfig& cfg) {
    cfg.validate();
    EvalReport report;
    char key[40];
    for (double t : cfg.sap_thresholds) {
        auto [ap, curve] = sap(predictions, gts, t, cfg);
        report.sap[t] = ap;
        std::snprintf(key, sizeof key, "sap%g", t);
        report.pr_curves[key] = std::move(curve);
    }
    double sum = 0.0;
    for (const auto& [t, ap] : report.sap) sum += ap;
    report.msap = sum / static_cast<double>(report.sap.size());

    double jsum = 0.0;
    for (double t : cfg.junc_thresholds) {
        auto [ap, curve] = junction_ap(predictions, gts, t, cfg);
        jsum += ap;
        std::snprintf(key, sizeof key, "mapj%g", t);
        report.pr_curves[key] = std::move(curve);
    }
    report.mapj = jsum / static_cast<double>(cfg.junc_thresholds.size());

    HeatmapResult hm = heatmap_metrics(predictions, gts, cfg);
    report.fh = hm.fh;
    report.aph = hm.aph;
    report.pr_curves["heatmap"] = std::move(hm.curve);
    return report;
}

void write_pr_csv(const std::string& path, const std::vector<PrPoint>& curve) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "score,tp,fp,recall,precision\n";
    char buf[160];
    for (const PrPoint& p : curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%ld,%ld,%.17g,%.17g\n", p.score, p.tp, p.fp,
                      p.recall, p.precision);
        os << buf;
    }
    if (!os) throw DataError("write failed: " + path);
}

std::string eval_report_text(const EvalReport& report) {
    std::string out;
    char buf[80];
    for (const auto& [t, ap] : report.sap) {
        std::snprintf(buf, sizeof buf, "sap%g %.17g\n", t, ap);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "msap %.17g\n", report.msap);
    out += buf;
    std::snprintf(buf, sizeof buf, "mapj %.17g\n", report.mapj);
    out += buf;
    std::snprintf(buf, sizeof buf, "aph %.17g\n", report.aph);
    out += buf;
    std::snprintf(buf, sizeof buf, "fh %.17g\n", report.fh);
    out += buf;
    return out;
}

}  // namespace wirefield
