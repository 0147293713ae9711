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

#include "wirefield/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wirefield/errors.hpp"
#include "wirefield/grid_io.hpp"
#include "wirefield/rng.hpp"

namespace wirefield {

void VerifyConfig::validate() const {
    if (s < 2) throw InvariantError("verify config: s must be >= 2");
    if (pool_window < 1 || s % pool_window != 0) {
        throw InvariantError("verify config: pool_window must divide s");
    }
    if (!(eta > 0.0)) throw InvariantError("verify config: eta must be positive");
    if (n < 1) throw InvariantError("verify config: n must be >= 1");
}

double segment_distance(const LineSegment& a, const LineSegment& b) {
    const double d11 = distance(a.p1, b.p1);
    const double d22 = distance(a.p2, b.p2);
    const double d12 = distance(a.p1, b.p2);
    const double d21 = distance(a.p2, b.p1);
    if (d11 + d22 <= d12 + d21) return std::max(d11, d22);
    return std::max(d12, d21);
}

namespace {

double min_gt_distance(const LineSegment& seg, const Wireframe& gt) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < gt.segments.size(); ++i) {
        best = std::min(best, segment_distance(seg, gt.segment_geometry(static_cast<int>(i))));
    }
    return best;
}

}  // namespace

std::vector<LabeledProposal> assign_labels(const std::vector<LineProposal>& proposals,
                                           const Wireframe& gt_coarse, const VerifyConfig& cfg) {
    cfg.validate();
    std::vector<LabeledProposal> out;
    out.reserve(proposals.size());
    for (const LineProposal& lp : proposals) {
        const bool positive = min_gt_distance(lp.seg, gt_coarse) < cfg.eta;
        out.push_back({lp.seg, positive ? ProposalLabel::positive : ProposalLabel::negative,
                       ProposalOrigin::matched});
    }
    return out;
}

namespace {

std::vector<LabeledProposal> draw_n(const std::vector<LabeledProposal>& pool, int n, Rng& rng) {
    std::vector<LabeledProposal> out;
    if (pool.empty()) return out;
    out.reserve(static_cast<size_t>(n));
    if (static_cast<int>(pool.size()) <= n) {
        out = pool;
        while (static_cast<int>(out.size()) < n) {
            out.push_back(pool[rng.uniform_index(pool.size())]);
        }
    } else {
        for (int i = 0; i < n; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
    }
    return out;
}

}  // namespace

SamplePools augment_samples(const std::vector<LabeledProposal>& labeled,
                            const Wireframe& gt_coarse, const VerifyConfig& cfg,
                            const std::vector<LineSegment>* file_negatives, uint64_t seed) {
    cfg.validate();
    std::vector<LabeledProposal> positives;
    std::vector<LabeledProposal> negatives;
    for (const LabeledProposal& lp : labeled) {
        (lp.label == ProposalLabel::positive ? positives : negatives).push_back(lp);
    }
    for (size_t i = 0; i < gt_coarse.segments.size(); ++i) {
        positives.push_back({gt_coarse.segment_geometry(static_cast<int>(i)),
                             ProposalLabel::positive, ProposalOrigin::gt_augment});
    }

    // Junction pairs that are not annotated segments, kept only when they
    // stay clear of every true segment so the label is unambiguous.
    std::vector<std::vector<char>> is_segment(
        gt_coarse.junctions.size(), std::vector<char>(gt_coarse.junctions.size(), 0));
    for (const auto& [a, b] : gt_coarse.segments) is_segment[a][b] = is_segment[b][a] = 1;
    for (size_t a = 0; a < gt_coarse.junctions.size(); ++a) {
        for (size_t b = a + 1; b < gt_coarse.junctions.size(); ++b) {
            if (is_segment[a][b]) continue;
            const LineSegment cand{gt_coarse.junctions[a], gt_coarse.junctions[b]};
            if (min_gt_distance(cand, gt_coarse) >= cfg.eta) {
                negatives.push_back(
                    {cand, ProposalLabel::negative, ProposalOrigin::junction_pair_negative});
            }
        }
    }
    if (file_negatives) {
        for (const LineSegment& seg : *file_negatives) {
            negatives.push_back({seg, ProposalLabel::negative, ProposalOrigin::file_negative});
        }
    }

    Rng rng(seed);
    SamplePools pools;
    pools.positives = draw_n(positives, cfg.n, rng);
    pools.negatives = draw_n(negatives, cfg.n, rng);
    return pools;
}

namespace {

double bilinear(const MultiGrid& g, int ch, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(g.cols - 1));
    y = std::clamp(y, 0.0, static_cast<double>(g.rows - 1));
    const int x0 = std::min(static_cast<int>(x), g.cols - 1);
    const int y0 = std::min(static_cast<int>(y), g.rows - 1);
    const int x1 = std::min(x0 + 1, g.cols - 1);
    const int y1 = std::min(y0 + 1, g.rows - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1.0 - fx) * g.at(ch, y0, x0) + fx * g.at(ch, y0, x1);
    const double bot = (1.0 - fx) * g.at(ch, y1, x0) + fx * g.at(ch, y1, x1);
    return (1.0 - fy) * top + fy * bot;
}

}  // namespace

std::vector<double> loi_pool(const LineSegment& seg, const FeatureMap& f,
                             const VerifyConfig& cfg) {
    cfg.validate();
    const int s = cfg.s;
    const int win = cfg.pool_window;
    std::vector<double> sampled(static_cast<size_t>(s));
    std::vector<double> out;
    out.reserve(static_cast<size_t>(f.channels.channels) * cfg.pooled_len());

    for (int ch = 0; ch < f.channels.channels; ++ch) {
        for (int k = 0; k < s; ++k) {
            const double t = static_cast<double>(k) / (s - 1);
            const Point p = seg.p1 + t * (seg.p2 - seg.p1);
            sampled[k] = bilinear(f.channels, ch, p.x, p.y);
        }
        for (int k = 0; k < s; k += win) {
            double m = sampled[k];
            for (int j = 1; j < win; ++j) m = std::max(m, sampled[k + j]);
            out.push_back(m);
        }
    }
    return out;
}

Scorer::Scorer(int input, int hidden)
    : input_dim(input),
      hidden_dim(hidden),
      w1(static_cast<size_t>(input) * hidden, 0.0),
      b1(static_cast<size_t>(hidden), 0.0),
      w2(static_cast<size_t>(hidden), 0.0) {}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kProbEps = 1e-7;

double forward(const Scorer& s, std::span<const double> x, std::vector<double>* hidden_out) {
    if (static_cast<int>(x.size()) != s.input_dim) {
        throw InvariantError("scorer: feature length mismatch");
    }
    double z2 = s.b2;
    if (hidden_out) hidden_out->resize(static_cast<size_t>(s.hidden_dim));
    for (int h = 0; h < s.hidden_dim; ++h) {
        double z = s.b1[h];
        const double* row = &s.w1[static_cast<size_t>(h) * s.input_dim];
        for (int i = 0; i < s.input_dim; ++i) z += row[i] * x[i];
        const double a = std::tanh(z);
        if (hidden_out) (*hidden_out)[h] = a;
        z2 += s.w2[h] * a;
    }
    return sigmoid(z2);
}

}  // namespace

double Scorer::score(std::span<const double> features) const {
    return forward(*this, features, nullptr);
}

double scorer_loss(const Scorer& scorer, const std::vector<TrainSample>& samples,
                   std::vector<double>* grad) {
    if (samples.empty()) throw InvariantError("scorer_loss: no samples");
    const size_t n_params = scorer.parameter_count();
    if (grad) grad->assign(n_params, 0.0);

    const double inv_n = 1.0 / static_cast<double>(samples.size());
    double loss = 0.0;
    std::vector<double> hidden;
    for (const TrainSample& sample : samples) {
        const double p_raw = forward(scorer, sample.features, &hidden);
        const double p = std::clamp(p_raw, kProbEps, 1.0 - kProbEps);
        const double y = static_cast<double>(sample.label);
        loss -= (y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv_n;
        if (!grad) continue;

        // d(BCE)/d(z2) for sigmoid output with clamped p.
        const double dz2 = (p - y) * inv_n;
        double* gw1 = grad->data();
        double* gb1 = gw1 + scorer.w1.size();
        double* gw2 = gb1 + scorer.b1.size();
        double* gb2 = gw2 + scorer.w2.size();
        *gb2 += dz2;
        for (int h = 0; h < scorer.hidden_dim; ++h) {
            gw2[h] += dz2 * hidden[h];
            const double dz1 = dz2 * scorer.w2[h] * (1.0 - hidden[h] * hidden[h]);
            gb1[h] += dz1;
            double* row = gw1 + static_cast<size_t>(h) * scorer.input_dim;
            for (int i = 0; i < scorer.input_dim; ++i) row[i] += dz1 * sample.features[i];
        }
    }
    return loss;
}

Scorer train_reference_scorer(const std::vector<TrainSample>& samples, uint64_t seed,
                              const TrainOptions& opts) {
    if (samples.empty()) throw InvariantError("train_reference_scorer: no samples");
    const int input_dim = static_cast<int>(samples[0].features.size());
    for (const TrainSample& s : samples) {
        if (static_cast<int>(s.features.size()) != input_dim) {
            throw InvariantError("train_reference_scorer: inconsistent feature lengths");
        }
    }

    Scorer scorer(input_dim, opts.hidden);
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(opts.hidden));
    for (double& w : scorer.w1) w = rng.uniform(-r1, r1);
    for (double& w : scorer.w2) w = rng.uniform(-r2, r2);

    std::vector<double> grad;
    std::vector<double> velocity(scorer.parameter_count(), 0.0);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        scorer_loss(scorer, samples, &grad);
        double* params[] = {scorer.w1.data(), scorer.b1.data(), scorer.w2.data(), &scorer.b2};
        const size_t sizes[] = {scorer.w1.size(), scorer.b1.size(), scorer.w2.size(), 1};
        size_t off = 0;
        for (int blk = 0; blk < 4; ++blk) {
            for (size_t i = 0; i < sizes[blk]; ++i, ++off) {
                velocity[off] = opts.momentum * velocity[off] - opts.learning_rate * grad[off];
                params[blk][i] += velocity[off];
            }
        }
    }
    return scorer;
}

void save_scorer(const Scorer& scorer, const std::string& path) {
    // Same flat container as the maps: 1 x 1 x N payload whose first two
    // values carry the dimensions.
    MultiGrid g(1, 1, static_cast<int>(2 + scorer.parameter_count()));
    size_t i = 0;
    g.v[i++] = static_cast<double>(scorer.input_dim);
    g.v[i++] = static_cast<double>(scorer.hidden_dim);
    for (double w : scorer.w1) g.v[i++] = w;
    for (double w : scorer.b1) g.v[i++] = w;
    for (double w : scorer.w2) g.v[i++] = w;
    g.v[i++] = scorer.b2;
    write_grid_file(path, GridSpec{1, 1, 1}, g);
}

Scorer load_scorer(const std::string& path) {
    GridSpec spec;
    const MultiGrid g = read_grid_file(path, &spec);
    if (g.channels != 1 || g.rows != 1 || g.v.size() < 2) {
        throw DataError("not a scorer file: " + path);
    }
    const int input_dim = static_cast<int>(g.v[0]);
    const int hidden_dim = static_cast<int>(g.v[1]);
    if (input_dim < 1 || hidden_dim < 1) throw DataError("bad scorer dimensions: " + path);
    Scorer scorer(input_dim, hidden_dim);
    if (g.v.size() != 2 + scorer.parameter_count()) {
        throw DataError("scorer payload length mismatch: " + path);
    }
    size_t i = 2;
    for (double& w : scorer.w1) w = g.v[i++];
    for (double& w : scorer.b1) w = g.v[i++];
    for (double& w : scorer.w2) w = g.v[i++];
    scorer.b2 = g.v[i++];
    return scorer;
}

}  // namespace wirefield
