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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "wirefield/rng.hpp"
#include "wirefield/verify.hpp"

using namespace wirefield;

TEST_CASE("segment_distance") {
    SUBCASE("hand-computed pairing") {
        CHECK(segment_distance({{0, 0}, {10, 0}}, {{0.5, 0}, {10, 1}}) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("identical segments, either endpoint order") {
        CHECK(segment_distance({{3, 4}, {7, 9}}, {{3, 4}, {7, 9}}) == 0.0);
        CHECK(segment_distance({{3, 4}, {7, 9}}, {{7, 9}, {3, 4}}) == 0.0);
    }
    SUBCASE("distant segments, min-sum pairing then max") {
        // Pairing sums: sqrt(50)+sqrt(145) vs sqrt(162)+sqrt(41); the first
        // is smaller, so the distance is max(sqrt(50), sqrt(145)).
        const double d = segment_distance({{0, 0}, {1, 0}}, {{5, 5}, {9, 9}});
        CHECK(d == doctest::Approx(std::sqrt(145.0)).epsilon(1e-12));
        CHECK(d == doctest::Approx(
                       oracle::verification_distance({{0, 0}, {1, 0}}, {{5, 5}, {9, 9}})));
    }
    SUBCASE("symmetric and order invariant on random pairs") {
        Rng rng(41);
        for (int i = 0; i < 500; ++i) {
            const LineSegment a{{rng.uniform(0, 20), rng.uniform(0, 20)},
                                {rng.uniform(0, 20), rng.uniform(0, 20)}};
            const LineSegment b{{rng.uniform(0, 20), rng.uniform(0, 20)},
                                {rng.uniform(0, 20), rng.uniform(0, 20)}};
            const double d = segment_distance(a, b);
            CHECK(d == segment_distance(b, a));
            CHECK(d == segment_distance({a.p2, a.p1}, b));
            CHECK(d == segment_distance(a, {b.p2, b.p1}));
            CHECK(d == doctest::Approx(oracle::verification_distance(a, b)).epsilon(1e-12));
        }
    }
}

namespace {

Wireframe coarse_gt() {
    Wireframe wf;
    wf.width = 32;
    wf.height = 32;
    wf.junctions = {{2, 2}, {26, 2}, {26, 26}, {2, 26}};
    wf.segments = {{0, 1}, {1, 2}};
    return wf;
}

std::vector<LineProposal> as_proposals(const std::vector<LineSegment>& segs) {
    std::vector<LineProposal> out;
    for (const LineSegment& s : segs) out.push_back({s, 0, 0, 0.0, -1, -1});
    return out;
}

}  // namespace

TEST_CASE("assign_labels") {
    const Wireframe gt = coarse_gt();
    const VerifyConfig cfg;
    SUBCASE("distance below eta is positive") {
        const auto labeled = assign_labels(as_proposals({{{2, 3}, {26, 3}}}), gt, cfg);
        REQUIRE(labeled.size() == 1);
        CHECK(labeled[0].label == ProposalLabel::positive);
        CHECK(labeled[0].origin == ProposalOrigin::matched);
    }
    SUBCASE("distance exactly eta is negative") {
        const auto labeled = assign_labels(as_proposals({{{2, 3.5}, {26, 3.5}}}), gt, cfg);
        REQUIRE(labeled.size() == 1);
        REQUIRE(segment_distance({{2, 3.5}, {26, 3.5}}, gt.segment_geometry(0)) ==
                doctest::Approx(1.5));
        CHECK(labeled[0].label == ProposalLabel::negative);
    }
    SUBCASE("labels match an exhaustive oracle on random proposals") {
        Rng rng(19);
        std::vector<LineSegment> segs;
        for (int i = 0; i < 300; ++i) {
            segs.push_back({{rng.uniform(0, 32), rng.uniform(0, 32)},
                            {rng.uniform(0, 32), rng.uniform(0, 32)}});
        }
        const auto labeled = assign_labels(as_proposals(segs), gt, cfg);
        for (size_t i = 0; i < segs.size(); ++i) {
            double best = 1e18;
            for (size_t g = 0; g < gt.segments.size(); ++g) {
                best = std::min(best, oracle::verification_distance(
                                          segs[i], gt.segment_geometry(int(g))));
            }
            const bool expect_positive = best < cfg.eta;
            CHECK((labeled[i].label == ProposalLabel::positive) == expect_positive);
        }
    }
}

TEST_CASE("augment_samples") {
    const Wireframe gt = coarse_gt();  // 4 junctions, 2 segments
    VerifyConfig cfg;
    cfg.n = 8;
    SUBCASE("ground-truth segments always join the positives") {
        const SamplePools pools = augment_samples({}, gt, cfg, nullptr, 0);
        int gt_entries = 0;
        for (const auto& p : pools.positives) {
            if (p.origin == ProposalOrigin::gt_augment) ++gt_entries;
        }
        CHECK(gt_entries == cfg.n);  // nothing else to draw from
        for (const auto& p : pools.positives) CHECK(p.label == ProposalLabel::positive);
    }
    SUBCASE("junction-pair negatives bounded by C(4,2) - 2") {
        // The eta filter can only shrink the pool below 4.
        std::vector<LabeledProposal> none;
        VerifyConfig big = cfg;
        big.n = 1000;
        const SamplePools pools = augment_samples(none, gt, big, nullptr, 0);
        int jp = 0;
        for (const auto& p : pools.negatives) {
            if (p.origin == ProposalOrigin::junction_pair_negative) ++jp;
        }
        CHECK(jp == 1000);  // drawn with replacement from the static pool
        // Count the distinct underlying segments.
        std::set<std::pair<std::pair<double, double>, std::pair<double, double>>> distinct;
        for (const auto& p : pools.negatives) {
            distinct.insert({{p.segment.p1.x, p.segment.p1.y}, {p.segment.p2.x, p.segment.p2.y}});
        }
        CHECK(distinct.size() <= 4);
        CHECK(distinct.size() >= 1);
    }
    SUBCASE("junction-pair negatives stay eta-clear of the truth") {
        const SamplePools pools = augment_samples({}, gt, cfg, nullptr, 0);
        for (const auto& p : pools.negatives) {
            double best = 1e18;
            for (size_t g = 0; g < gt.segments.size(); ++g) {
                best = std::min(best,
                                segment_distance(p.segment, gt.segment_geometry(int(g))));
            }
            CHECK(best >= cfg.eta);
        }
    }
    SUBCASE("fixed seed draws identically") {
        const SamplePools a = augment_samples({}, gt, cfg, nullptr, 123);
        const SamplePools b = augment_samples({}, gt, cfg, nullptr, 123);
        REQUIRE(a.positives.size() == b.positives.size());
        REQUIRE(a.negatives.size() == b.negatives.size());
        for (size_t i = 0; i < a.negatives.size(); ++i) {
            CHECK(a.negatives[i].segment.p1.x == b.negatives[i].segment.p1.x);
            CHECK(a.negatives[i].segment.p2.y == b.negatives[i].segment.p2.y);
        }
    }
    SUBCASE("file negatives enter the pool") {
        const std::vector<LineSegment> file_negs = {{{30, 30}, {31, 2}}};
        VerifyConfig one = cfg;
        one.n = 50;
        const SamplePools pools = augment_samples({}, gt, one, &file_negs, 7);
        bool seen = false;
        for (const auto& p : pools.negatives) {
            if (p.origin == ProposalOrigin::file_negative) seen = true;
        }
        CHECK(seen);
    }
}

TEST_CASE("loi_pool") {
    const GridSpec spec{8, 8, 1};
    SUBCASE("bilinear reference value") {
        FeatureMap f{spec, MultiGrid(1, 8, 8, 0.0)};
        f.channels.at(0, 0, 0) = 0.0;
        f.channels.at(0, 0, 1) = 1.0;
        f.channels.at(0, 1, 0) = 2.0;
        f.channels.at(0, 1, 1) = 3.0;
        VerifyConfig cfg;
        cfg.s = 2;
        cfg.pool_window = 1;
        // Degenerate segment at a single point would be invalid; sample a
        // segment whose both samples sit at (0.5, 0.5).
        const auto out = loi_pool({{0.5, 0.5}, {0.5, 0.5 + 1e-12}}, f, cfg);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-9));
    }
    SUBCASE("constant map pools to the constant") {
        FeatureMap f{spec, MultiGrid(3, 8, 8, 2.5)};
        const VerifyConfig cfg{32, 4, 1.5, 300};
        const auto out = loi_pool({{0.5, 0.5}, {7, 6}}, f, cfg);
        REQUIRE(out.size() == 3 * 32 / 4);
        for (double v : out) CHECK(v == doctest::Approx(2.5));
    }
    SUBCASE("sample points are uniform (s = 4 over a length-3 segment)") {
        // Feature = x coordinate; samples at x = 0,1,2,3 pool (window 1) to
        // exactly those values.
        FeatureMap f{spec, MultiGrid(1, 8, 8)};
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) f.channels.at(0, r, c) = c;
        }
        VerifyConfig cfg;
        cfg.s = 4;
        cfg.pool_window = 1;
        const auto out = loi_pool({{0, 2}, {3, 2}}, f, cfg);
        REQUIRE(out.size() == 4);
        CHECK(out[0] == doctest::Approx(0.0));
        CHECK(out[1] == doctest::Approx(1.0));
        CHECK(out[2] == doctest::Approx(2.0));
        CHECK(out[3] == doctest::Approx(3.0));
    }
    SUBCASE("endpoint reversal reverses pooled blocks per channel") {
        Rng rng(3);
        FeatureMap f{spec, MultiGrid(2, 8, 8)};
        for (double& v : f.channels.v) v = rng.uniform();
        const VerifyConfig cfg{8, 2, 1.5, 300};
        const LineSegment seg{{0.5, 1}, {6.5, 6}};
        const auto fwd = loi_pool(seg, f, cfg);
        const auto rev = loi_pool({seg.p2, seg.p1}, f, cfg);
        const int blocks = cfg.s / cfg.pool_window;
        REQUIRE(fwd.size() == rev.size());
        for (int ch = 0; ch < 2; ++ch) {
            for (int b = 0; b < blocks; ++b) {
                CHECK(fwd[ch * blocks + b] ==
                      doctest::Approx(rev[ch * blocks + (blocks - 1 - b)]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("full-window pooling is endpoint-order invariant") {
        Rng rng(4);
        FeatureMap f{spec, MultiGrid(2, 8, 8)};
        for (double& v : f.channels.v) v = rng.uniform();
        const VerifyConfig cfg{16, 16, 1.5, 300};
        const LineSegment seg{{1, 1}, {6, 7}};
        const auto fwd = loi_pool(seg, f, cfg);
        const auto rev = loi_pool({seg.p2, seg.p1}, f, cfg);
        REQUIRE(fwd.size() == rev.size());
        for (size_t i = 0; i < fwd.size(); ++i) {
            CHECK(fwd[i] == doctest::Approx(rev[i]).epsilon(1e-12));
        }
    }
    SUBCASE("border samples clamp") {
        FeatureMap f{spec, MultiGrid(1, 8, 8, 1.0)};
        const VerifyConfig cfg{4, 1, 1.5, 300};
        const auto out = loi_pool({{-3, -3}, {10, 10}}, f, cfg);
        for (double v : out) CHECK(v == doctest::Approx(1.0));
    }
}

TEST_CASE("verify config validation") {
    VerifyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.pool_window = 5;  // does not divide s = 32
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
    cfg = {};
    cfg.s = 1;
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
    cfg = {};
    cfg.eta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
}

TEST_CASE("scorer") {
    SUBCASE("zero weights score 0.5") {
        const Scorer s(7, 4);
        const std::vector<double> x(7, 0.3);
        CHECK(s.score(x) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("feature length mismatch throws") {
        const Scorer s(7, 4);
        const std::vector<double> x(6, 0.0);
        CHECK_THROWS_AS(s.score(x), InvariantError);
    }
    SUBCASE("BCE of 0.5 against label 1 is ln 2") {
        const Scorer s(3, 2);  // zero weights -> p = 0.5
        const std::vector<TrainSample> samples = {{{0.1, 0.2, 0.3}, 1}};
        CHECK(scorer_loss(s, samples, nullptr) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("analytic gradient matches central finite differences") {
        Rng rng(55);
        std::vector<TrainSample> samples;
        for (int i = 0; i < 12; ++i) {
            TrainSample ts;
            for (int k = 0; k < 5; ++k) ts.features.push_back(rng.uniform(-1, 1));
            ts.label = rng.bernoulli(0.5) ? 1 : 0;
            samples.push_back(ts);
        }
        Scorer s(5, 3);
        for (double& w : s.w1) w = rng.uniform(-0.8, 0.8);
        for (double& w : s.b1) w = rng.uniform(-0.3, 0.3);
        for (double& w : s.w2) w = rng.uniform(-0.8, 0.8);
        s.b2 = rng.uniform(-0.3, 0.3);

        std::vector<double> grad;
        scorer_loss(s, samples, &grad);
        REQUIRE(grad.size() == s.parameter_count());

        const double h = 1e-5;
        size_t idx = 0;
        auto check_block = [&](double* block, size_t len) {
            for (size_t i = 0; i < len; ++i, ++idx) {
                const double saved = block[i];
                block[i] = saved + h;
                const double up = scorer_loss(s, samples, nullptr);
                block[i] = saved - h;
                const double down = scorer_loss(s, samples, nullptr);
                block[i] = saved;
                const double fd = (up - down) / (2 * h);
                CHECK(grad[idx] ==
                      doctest::Approx(fd).epsilon(1e-4));
            }
        };
        check_block(s.w1.data(), s.w1.size());
        check_block(s.b1.data(), s.b1.size());
        check_block(s.w2.data(), s.w2.size());
        check_block(&s.b2, 1);
    }
    SUBCASE("separable toy data trains to high AUC") {
        Rng rng(66);
        std::vector<TrainSample> train;
        for (int i = 0; i < 200; ++i) {
            TrainSample ts;
            const bool pos = i % 2 == 0;
            for (int k = 0; k < 4; ++k) {
                ts.features.push_back((pos ? 0.6 : -0.6) + 0.3 * rng.gaussian());
            }
            ts.label = pos ? 1 : 0;
            train.push_back(ts);
        }
        TrainOptions opts;
        opts.epochs = 200;
        const Scorer s = train_reference_scorer(train, 0, opts);
        std::vector<double> pos_scores, neg_scores;
        for (int i = 0; i < 100; ++i) {
            TrainSample ts;
            const bool pos = i % 2 == 0;
            for (int k = 0; k < 4; ++k) {
                ts.features.push_back((pos ? 0.6 : -0.6) + 0.3 * rng.gaussian());
            }
            (pos ? pos_scores : neg_scores).push_back(s.score(ts.features));
        }
        CHECK(oracle::pair_counting_auc(pos_scores, neg_scores) > 0.95);
    }
    SUBCASE("training is deterministic in the seed") {
        Rng rng(9);
        std::vector<TrainSample> train;
        for (int i = 0; i < 40; ++i) {
            train.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, i % 2});
        }
        TrainOptions opts;
        opts.epochs = 50;
        const Scorer a = train_reference_scorer(train, 5, opts);
        const Scorer b = train_reference_scorer(train, 5, opts);
        CHECK(a.w1 == b.w1);
        CHECK(a.w2 == b.w2);
        CHECK(a.b2 == b.b2);
    }
    SUBCASE("weights round trip through the container") {
        Rng rng(10);
        Scorer s(6, 5);
        for (double& w : s.w1) w = rng.uniform(-1, 1);
        for (double& w : s.b1) w = rng.uniform(-1, 1);
        for (double& w : s.w2) w = rng.uniform(-1, 1);
        s.b2 = 0.25;
        const std::string path =
            (std::filesystem::temp_directory_path() / "scorer.bin").string();
        save_scorer(s, path);
        const Scorer back = load_scorer(path);
        CHECK(back.input_dim == 6);
        CHECK(back.hidden_dim == 5);
        for (size_t i = 0; i < s.w1.size(); ++i) {
            CHECK(back.w1[i] == doctest::Approx(s.w1[i]).epsilon(1e-6));
        }
        CHECK(back.b2 == doctest::Approx(0.25).epsilon(1e-7));
    }
}
