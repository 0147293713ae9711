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

#include <cstdint>
#include <string>
#include <vector>

#include "wirefield/hafm.hpp"
#include "wirefield/junction.hpp"
#include "wirefield/losses.hpp"
#include "wirefield/metrics.hpp"
#include "wirefield/refine.hpp"
#include "wirefield/scene.hpp"
#include "wirefield/verify.hpp"

namespace wirefield {

enum class PredictorKind { oracle, noisy, file };

/// Stand-in for a learned map predictor. `oracle` returns the exact
/// ground-truth encodings; `noisy` perturbs them with seeded truncated
/// Gaussian noise per normalized channel (sigma), drops foreground pixels
/// with probability rho, and reports the true distance residual; `file`
/// loads serialized maps.
struct Predictor {
    PredictorKind kind = PredictorKind::oracle;
    double sigma = 0.0;
    double rho = 0.0;
    uint64_t seed = 0;
    std::string afm_path;
    std::string residual_path;
    std::string junction_path;
    std::string feature_path;  // optional; defaults to stacking the maps
};

struct PipelineConfig {
    GridSpec grid;
    CodecConfig codec;
    MatchConfig match_cfg;
    VerifyConfig verify_cfg;
    LossConfig loss;
    MetricConfig metric_cfg;
    int junction_topk = 300;
    double offset_scale = 0.0;  // <= 0 uses the bin size

    void validate() const;
};

struct PredictionMaps {
    AttractionFieldMap afm;
    ResidualMap residual;
    JunctionMaps junctions;
    FeatureMap features;
};

/// Stacks field + junction channels into the 7-channel oracle feature map.
FeatureMap stack_features(const AttractionFieldMap& afm, const JunctionMaps& junctions);

PredictionMaps predict(const Wireframe& wf, const Predictor& predictor, const GridSpec& spec,
                       const CodecConfig& cfg);

struct ParseStats {
    int junction_proposals = 0;
    int line_proposals_decoded = 0;
    int line_proposals_verified = 0;  // segments entering verification
};

/// Three-stage parse: decode line and junction proposals, match them,
/// score the survivors with LOI pooling + the scorer. Output geometry is
/// in image pixels; junction scores are mask values.
ScoredWireframe parse(const PredictionMaps& maps, const PipelineConfig& cfg, const Scorer& scorer,
                      ParseStats* stats = nullptr);

ScoredWireframe parse(const Wireframe& wf, const Predictor& predictor, const PipelineConfig& cfg,
                      const Scorer& scorer, ParseStats* stats = nullptr);

struct SceneCounts {
    std::string name;
    int junction_proposals = 0;
    int line_proposals_verified = 0;
    int gt_lines = 0;
};

struct RunResult {
    EvalReport report;
    std::vector<SceneCounts> counts;
    std::vector<std::string> failed_scenes;  // "<name>: <error>"
};

/// Parses every *.json scene in dataset_dir (sorted by name), writes the
/// per-scene parsed wireframes, PR curves, the metric report, and a run
/// log with per-scene proposal counts under out_dir. Unreadable scenes are
/// recorded and skipped. With threads > 1 scenes run in parallel; results
/// aggregate in name order either way.
RunResult run_eval(const std::string& dataset_dir, const std::string& out_dir,
                   const PipelineConfig& cfg, const Predictor& predictor, const Scorer& scorer,
                   int threads = 1);

std::string run_log_text(const RunResult& result);

/// Plain-text key-value config file ("key = value", '#' comments). Keys
/// are documented in the CLI help; unknown keys are an error.
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace wirefield
