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
#include <span>
#include <string>
#include <vector>

#include "wirefield/geom.hpp"
#include "wirefield/grid.hpp"
#include "wirefield/hafm.hpp"
#include "wirefield/scene.hpp"

namespace wirefield {

/// Dense feature stack on the coarse grid, sampled by LOI pooling.
struct FeatureMap {
    GridSpec spec;
    MultiGrid channels;
};

struct VerifyConfig {
    int s = 32;           // sample points along a segment
    int pool_window = 4;  // 1-D max-pool window (= stride)
    double eta = 1.5;     // positive/negative distance threshold, coarse px
    int n = 300;          // samples drawn per class

    void validate() const;
    int pooled_len() const { return s / pool_window; }
};

enum class ProposalLabel { negative = 0, positive = 1 };

enum class ProposalOrigin {
    matched,                 // came out of the refinement stage
    gt_augment,              // ground-truth segment added to the positives
    junction_pair_negative,  // junction pair that is not a segment
    file_negative,           // loaded from a negatives file
};

struct LabeledProposal {
    LineSegment segment;  // coarse px
    ProposalLabel label = ProposalLabel::negative;
    ProposalOrigin origin = ProposalOrigin::matched;
};

/// Distance between two segments: endpoints are paired by the pairing with
/// the smaller summed distance, and the result is the larger of the two
/// paired endpoint distances. Symmetric and endpoint-order invariant.
double segment_distance(const LineSegment& a, const LineSegment& b);

/// Positive iff some ground-truth segment lies strictly closer than eta.
/// Both the proposals and gt must be in the coarse frame.
std::vector<LabeledProposal> assign_labels(const std::vector<LineProposal>& proposals,
                                           const Wireframe& gt_coarse, const VerifyConfig& cfg);

struct SamplePools {
    std::vector<LabeledProposal> positives;
    std::vector<LabeledProposal> negatives;
};

/// Builds the two training pools: positives are the matched positives plus
/// every ground-truth segment; negatives are the matched negatives, the
/// junction pairs that do not form a segment (kept only when >= eta from
/// every ground-truth segment), and any file-loaded negatives. Each pool
/// is then sampled down (or up, with replacement) to cfg.n entries.
SamplePools augment_samples(const std::vector<LabeledProposal>& labeled,
                            const Wireframe& gt_coarse, const VerifyConfig& cfg,
                            const std::vector<LineSegment>* file_negatives, uint64_t seed);

/// Line-of-interest pooling: s points sampled uniformly from p1 to p2,
/// bilinear lookup per channel (feature value (r, c) sits at x = c, y = r;
/// out-of-range samples clamp to the border), then per-channel 1-D
/// max-pooling with window = stride = pool_window. Output length is
/// channels * s / pool_window.
std::vector<double> loi_pool(const LineSegment& seg, const FeatureMap& f,
                             const VerifyConfig& cfg);

/// Two-layer perceptron with tanh hidden units and a sigmoid output.
/// Zero-initialized weights score everything 0.5.
struct Scorer {
    int input_dim = 0;
    int hidden_dim = 0;
    std::vector<double> w1;  // hidden_dim x input_dim, row-major
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // hidden_dim
    double b2 = 0.0;

    Scorer() = default;
    Scorer(int input, int hidden);

    /// Throws InvariantError on a feature-length mismatch.
    double score(std::span<const double> features) const;

    size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
};

struct TrainSample {
    std::vector<double> features;
    int label = 0;  // 0 or 1
};

/// Mean binary cross-entropy of the scorer over the samples; when grad is
/// non-null it receives d(loss)/d(param) flattened as (w1, b1, w2, b2).
double scorer_loss(const Scorer& scorer, const std::vector<TrainSample>& samples,
                   std::vector<double>* grad);

struct TrainOptions {
    int epochs = 300;
    double learning_rate = 2.0;
    double momentum = 0.9;
    int hidden = 32;
};

/// Full-batch gradient descent on binary cross-entropy, deterministic for
/// a given seed.
Scorer train_reference_scorer(const std::vector<TrainSample>& samples, uint64_t seed,
                              const TrainOptions& opts = {});

void save_scorer(const Scorer& scorer, const std::string& path);
Scorer load_scorer(const std::string& path);

}  // namespace wirefield
