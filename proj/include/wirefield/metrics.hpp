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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wirefield/scene.hpp"

namespace wirefield {

struct MetricConfig {
    std::vector<double> sap_thresholds{5.0, 10.0, 15.0};    // squared px at eval resolution
    std::vector<double> junc_thresholds{0.5, 1.0, 2.0};     // px at eval resolution
    int eval_w = 128;
    int eval_h = 128;
    double heatmap_tolerance = 1.5;   // px
    int heatmap_threshold_count = 99; // thresholds i/(count+1), i = 1..count

    void validate() const;
};

/// One point of a precision-recall sweep. For ranked metrics `score` is
/// the candidate score at that rank; for the heatmap sweep it is the
/// score threshold. tp/fp are cumulative counts.
struct PrPoint {
    double score = 0.0;
    long tp = 0;
    long fp = 0;
    double recall = 0.0;
    double precision = 0.0;
};

struct EvalReport {
    std::map<double, double> sap;  // threshold -> AP
    double msap = 0.0;
    double mapj = 0.0;
    double fh = 0.0;
    double aph = 0.0;
    std::map<std::string, std::vector<PrPoint>> pr_curves;
};

/// Structural AP of line segments at one overlap threshold. Candidates
/// pool over the dataset, rank by score (ties: image index, then endpoint
/// coordinates), and claim the nearest unclaimed ground-truth segment in
/// their image under the two-pairing summed-squared-endpoint distance.
/// AP is the rectangle-rule sum over true-positive ranks.
std::pair<double, std::vector<PrPoint>> sap(const std::vector<ScoredWireframe>& predictions,
                                            const std::vector<Wireframe>& gts, double threshold,
                                            const MetricConfig& cfg);

/// Mean of sap over cfg.sap_thresholds.
double msap(const std::vector<ScoredWireframe>& predictions, const std::vector<Wireframe>& gts,
            const MetricConfig& cfg);

/// Junction AP with plain Euclidean distance, averaged over
/// cfg.junc_thresholds.
double mapj(const std::vector<ScoredWireframe>& predictions, const std::vector<Wireframe>& gts,
            const MetricConfig& cfg);

struct HeatmapResult {
    double fh = 0.0;
    double aph = 0.0;
    std::vector<PrPoint> curve;
};

/// Rasterized pixel-level precision/recall over a sweep of score
/// thresholds, with greedy one-to-one pixel matching within
/// cfg.heatmap_tolerance. fh is the best F-score over the sweep, aph the
/// trapezoidal area under the swept precision-recall polyline.
HeatmapResult heatmap_metrics(const std::vector<ScoredWireframe>& predictions,
                              const std::vector<Wireframe>& gts, const MetricConfig& cfg);

EvalReport evaluate(const std::vector<ScoredWireframe>& predictions,
                    const std::vector<Wireframe>& gts, const MetricConfig& cfg);

/// Integer rasterization of a segment (endpoints rounded, Bresenham walk,
/// clipped to the grid). Both endpoints are included.
std::vector<std::pair<int, int>> rasterize_segment(Point a, Point b, int grid_w, int grid_h);

void write_pr_csv(const std::string& path, const std::vector<PrPoint>& curve);
std::string eval_report_text(const EvalReport& report);

}  // namespace wirefield
