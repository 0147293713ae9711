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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "wirefield/grid_io.hpp"
#include "wirefield/hafm.hpp"
#include "wirefield/rng.hpp"
#include "wirefield/scene.hpp"

using namespace wirefield;

namespace {

// Wireframe over explicit endpoint pairs (junctions deduplicated).
Wireframe make_wf(int w, int h, const std::vector<LineSegment>& segs) {
    Wireframe wf;
    wf.width = w;
    wf.height = h;
    auto find_or_add = [&](const Point& p) {
        for (size_t i = 0; i < wf.junctions.size(); ++i) {
            if (distance(wf.junctions[i], p) < 1e-9) return static_cast<int>(i);
        }
        wf.junctions.push_back(p);
        return static_cast<int>(wf.junctions.size() - 1);
    };
    for (const LineSegment& s : segs) {
        wf.segments.emplace_back(find_or_add(s.p1), find_or_add(s.p2));
    }
    return wf;
}

bool same_unordered(const LineSegment& a, const LineSegment& b, double tol) {
    const bool direct = distance(a.p1, b.p1) <= tol && distance(a.p2, b.p2) <= tol;
    const bool flipped = distance(a.p1, b.p2) <= tol && distance(a.p2, b.p1) <= tol;
    return direct || flipped;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("assign_support basics") {
    SUBCASE("single segment owns its nearby pixels") {
        // One horizontal segment; with B = 1 coarse == image coordinates.
        const GridSpec spec{32, 32, 1};
        const Wireframe wf = make_wf(32, 32, {{{1, 16}, {30, 16}}});
        const Grid<int> support = assign_support(wf, spec);
        CHECK(support.at(13, 10) == 0);  // center (10.5, 13.5), distance 2.5
        CHECK(support.at(18, 10) == 0);  // below the segment
    }
    SUBCASE("pixels beyond d_max are background") {
        const GridSpec spec{32, 32, 1};
        const Wireframe wf = make_wf(32, 32, {{{1, 16.5}, {30, 16.5}}});
        const Grid<int> support = assign_support(wf, spec, {5.0});
        CHECK(support.at(12, 10) == 0);   // distance 4
        CHECK(support.at(11, 10) == 0);   // distance 5, boundary included
        CHECK(support.at(10, 10) == -1);  // distance 6
    }
    SUBCASE("equidistant pixel goes to the lower segment index") {
        const GridSpec spec{32, 32, 1};
        const Wireframe wf = make_wf(32, 32, {{{2, 7.5}, {28, 7.5}}, {{2, 13.5}, {28, 13.5}}});
        const Grid<int> support = assign_support(wf, spec);
        // Equidistance checked by brute force on both segments.
        const Point px = bin_center(10, 12);
        const double d0 = segment_point_distance(px, wf.segment_geometry(0));
        const double d1 = segment_point_distance(px, wf.segment_geometry(1));
        REQUIRE(d0 == doctest::Approx(d1).epsilon(1e-12));
        CHECK(support.at(10, 12) == 0);
    }
    SUBCASE("pixel whose winner has an outside foot is background, not reassigned") {
        const GridSpec spec{32, 32, 1};
        // Pixel (20.5, 10.5): the short top segment wins on clamped
        // distance but its perpendicular foot misses it.
        const Wireframe wf = make_wf(32, 32, {{{14, 9}, {18, 9}}, {{2, 20}, {30, 20}}});
        const Grid<int> support = assign_support(wf, spec);
        const Point px = bin_center(10, 20);
        REQUIRE(segment_point_distance(px, wf.segment_geometry(0)) <
                segment_point_distance(px, wf.segment_geometry(1)));
        REQUIRE_FALSE(canonical_frame(px, wf.segment_geometry(0)).has_value());
        CHECK(support.at(10, 20) == -1);
    }
    SUBCASE("empty wireframe is all background") {
        const GridSpec spec{16, 16, 1};
        const Grid<int> support = assign_support(make_wf(16, 16, {}), spec);
        for (int v : support.v) CHECK(v == -1);
    }
}

TEST_CASE("support monotone in d_max") {
    const GridSpec spec{512, 512, 4};
    const Wireframe wf = synth_scene(5, spec, 12, 40.0, 24.0);
    const Grid<int> s2 = assign_support(wf, spec, {2.0});
    const Grid<int> s5 = assign_support(wf, spec, {5.0});
    const Grid<int> s9 = assign_support(wf, spec, {9.0});
    size_t n2 = 0, n5 = 0, n9 = 0;
    for (size_t i = 0; i < s2.v.size(); ++i) {
        if (s2.v[i] >= 0) {
            ++n2;
            CHECK(s5.v[i] >= 0);
        }
        if (s5.v[i] >= 0) {
            ++n5;
            CHECK(s9.v[i] >= 0);
        }
        if (s9.v[i] >= 0) ++n9;
    }
    CHECK(n2 < n5);
    CHECK(n5 < n9);
}

TEST_CASE("normalization") {
    const CodecConfig cfg{5.0};
    SUBCASE("reference sample maps to (0.4, 0.5, 0.5, 0.5)") {
        const auto ch = normalize_sample({2.0, 0.0, M_PI / 4, -M_PI / 4}, cfg);
        CHECK(ch[0] == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(ch[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(ch[2] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(ch[3] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("denormalize inverts") {
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            const AttractionSample s{rng.uniform(1e-3, 5.0), rng.uniform(-M_PI, M_PI),
                                     rng.uniform(1e-6, M_PI / 2 - 1e-6),
                                     rng.uniform(-M_PI / 2 + 1e-6, 0.0)};
            const AttractionSample back = denormalize_sample(normalize_sample(s, cfg), cfg);
            CHECK(back.d == doctest::Approx(s.d).epsilon(1e-12));
            CHECK(back.theta == doctest::Approx(s.theta).epsilon(1e-12));
            CHECK(back.theta1 == doctest::Approx(s.theta1).epsilon(1e-12));
            CHECK(back.theta2 == doctest::Approx(s.theta2).epsilon(1e-12));
        }
    }
}

TEST_CASE("encode basics") {
    SUBCASE("empty wireframe encodes to all background") {
        const GridSpec spec{16, 16, 1};
        const AttractionFieldMap afm = encode(make_wf(16, 16, {}), spec);
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 16; ++c) {
                CHECK(afm.is_background(r, c));
                CHECK(afm.channels.at(0, r, c) == -1.0);
                CHECK(afm.channels.at(1, r, c) == 0.0);
                CHECK(afm.channels.at(2, r, c) == 0.0);
                CHECK(afm.channels.at(3, r, c) == 0.0);
            }
        }
    }
    SUBCASE("foreground channels stay in range over random scenes") {
        const GridSpec spec{512, 512, 4};
        for (uint64_t seed = 0; seed < 20; ++seed) {
            const AttractionFieldMap afm = encode(synth_scene(seed, spec, 15, 40.0, 24.0), spec);
            for (int r = 0; r < spec.rows(); ++r) {
                for (int c = 0; c < spec.cols(); ++c) {
                    if (afm.is_background(r, c)) continue;
                    CHECK(afm.channels.at(0, r, c) > 0.0);
                    CHECK(afm.channels.at(0, r, c) <= 1.0);
                    for (int ch = 1; ch < 4; ++ch) {
                        CHECK(afm.channels.at(ch, r, c) >= 0.0);
                        CHECK(afm.channels.at(ch, r, c) < 1.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("decode_pixel closed form") {
    SUBCASE("vertical segment case") {
        const LineSegment seg = decode_pixel({0, 3}, {2.0, 0.0, std::atan(1.5), -std::atan(1.5)});
        CHECK(same_unordered(seg, {{2, 6}, {2, 0}}, 1e-12));
        CHECK(distance(seg.p1, {2, 6}) < 1e-12);  // top endpoint comes out first
    }
    SUBCASE("rotated case") {
        const LineSegment seg = decode_pixel({0, 0}, {1.0, M_PI / 2, M_PI / 4, -std::atan(3.0)});
        CHECK(distance(seg.p1, {-1, 1}) < 1e-12);
        CHECK(distance(seg.p2, {3, 1}) < 1e-12);
    }
    SUBCASE("inverts canonical_frame over random configurations") {
        Rng rng(77);
        for (int i = 0; i < 2000; ++i) {
            const Point p{rng.uniform(0, 30), rng.uniform(0, 30)};
            const LineSegment seg{{rng.uniform(0, 30), rng.uniform(0, 30)},
                                  {rng.uniform(0, 30), rng.uniform(0, 30)}};
            if (seg.length() < 1e-2) continue;
            const auto f = canonical_frame(p, seg);
            if (!f) continue;
            const AttractionSample s{f->d, f->theta, std::atan(f->y1), std::atan(f->y2)};
            CHECK(same_unordered(decode_pixel(p, s), seg,
                                 1e-9 * (1.0 + norm(seg.p1) + norm(seg.p2))));
        }
    }
}

TEST_CASE("exact dual round trip on encoded scenes") {
    const GridSpec spec{512, 512, 4};
    const CodecConfig cfg;
    for (uint64_t seed = 100; seed < 110; ++seed) {
        const Wireframe wf = synth_scene(seed, spec, 15, 40.0, 24.0);
        const Grid<int> support = assign_support(wf, spec, cfg);
        const AttractionFieldMap afm = encode(wf, spec, cfg);
        const Wireframe coarse = to_coarse(wf, spec);

        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                const int idx = support.at(r, c);
                CHECK(afm.is_background(r, c) == (idx < 0));
                if (idx < 0) continue;
                const LineSegment gt_seg = coarse.segment_geometry(idx);

                // Unnormalized path.
                const auto f = canonical_frame(bin_center(r, c), gt_seg);
                REQUIRE(f.has_value());
                const AttractionSample direct{f->d, f->theta, std::atan(f->y1), std::atan(f->y2)};
                CHECK(same_unordered(decode_pixel(bin_center(r, c), direct), gt_seg, 1e-9));

                // Normalize -> denormalize path (what the map stores).
                const AttractionSample stored = denormalize_sample(
                    {afm.channels.at(0, r, c), afm.channels.at(1, r, c),
                     afm.channels.at(2, r, c), afm.channels.at(3, r, c)},
                    cfg);
                CHECK(same_unordered(decode_pixel(bin_center(r, c), stored), gt_seg, 1e-6));
            }
        }
    }
}

TEST_CASE("decode enumeration cases") {
    const GridSpec spec{8, 8, 1};
    const CodecConfig cfg{5.0};
    auto make_maps = [&](double d_px, double res_px) {
        AttractionFieldMap afm{spec, MultiGrid(4, 8, 8)};
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) afm.channels.at(0, r, c) = -1.0;
        }
        afm.channels.at(0, 3, 3) = d_px / cfg.d_max;
        afm.channels.at(1, 3, 3) = 0.5;  // theta = 0
        afm.channels.at(2, 3, 3) = 0.5;  // theta1 = pi/4
        afm.channels.at(3, 3, 3) = 0.5;  // theta2 = -pi/4
        ResidualMap res = zero_residual(spec);
        res.values.at(3, 3) = res_px / cfg.d_max;
        return std::make_pair(afm, res);
    };
    auto distances = [&](const std::vector<LineProposal>& props) {
        std::vector<double> out;
        for (const LineProposal& p : props) {
            out.push_back(project_to_segment(bin_center(p.row, p.col), p.seg).dist);
        }
        return out;
    };

    SUBCASE("d=3, residual=1 emits 2, 3, 4") {
        const auto [afm, res] = make_maps(3.0, 1.0);
        const auto d = distances(decode(afm, &res, cfg));
        REQUIRE(d.size() == 3);
        CHECK(d[0] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(d[1] == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(d[2] == doctest::Approx(4.0).epsilon(1e-9));
    }
    SUBCASE("d=4.8, residual=0.5 rejects the 5.3 candidate") {
        const auto [afm, res] = make_maps(4.8, 0.5);
        const auto d = distances(decode(afm, &res, cfg));
        REQUIRE(d.size() == 2);
        CHECK(d[0] == doctest::Approx(4.3).epsilon(1e-9));
        CHECK(d[1] == doctest::Approx(4.8).epsilon(1e-9));
    }
    SUBCASE("d=0.2, residual=0.3 rejects the negative candidate") {
        const auto [afm, res] = make_maps(0.2, 0.3);
        const auto d = distances(decode(afm, &res, cfg));
        REQUIRE(d.size() == 2);
        CHECK(d[0] == doctest::Approx(0.2).epsilon(1e-9));
        CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("zero residual emits one proposal per pixel") {
        const auto [afm, res] = make_maps(3.0, 0.0);
        CHECK(decode(afm, &res, cfg).size() == 1);
        CHECK(decode(afm, nullptr, cfg).size() == 1);
    }
    SUBCASE("residual map with the wrong spec throws") {
        const auto [afm, res] = make_maps(3.0, 0.0);
        const ResidualMap other = zero_residual(GridSpec{16, 16, 1});
        CHECK_THROWS_AS(decode(afm, &other, cfg), InvariantError);
    }
}

TEST_CASE("residual enumeration recovers the truth exactly") {
    // Multiplicative noise keeps the prediction within a factor of two of
    // the truth, which makes the subtraction and re-addition exact in
    // floating point; the recovery check is then bitwise.
    const GridSpec spec{512, 512, 4};
    const CodecConfig cfg;
    Rng rng(31);
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const AttractionFieldMap gt = encode(synth_scene(seed, spec, 12, 40.0, 24.0), spec, cfg);
        AttractionFieldMap noisy = gt;
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                if (gt.is_background(r, c)) continue;
                double& v = noisy.channels.at(0, r, c);
                v = std::min(1.0, v * rng.uniform(0.5, 2.0));
            }
        }
        const ResidualMap res = residual_gt(gt, noisy);
        int checked = 0;
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                if (gt.is_background(r, c)) continue;
                const double d_hat = noisy.channels.at(0, r, c);
                const double delta = res.values.at(r, c);
                const double up = d_hat + delta;
                const double down = d_hat - delta;
                const double truth = gt.channels.at(0, r, c);
                CHECK((up == truth || down == truth));
                ++checked;
            }
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("6-D reference codec") {
    SUBCASE("hand-computed displacement vectors") {
        // Segment x = 2 seen from bin center (0.5, 3.5) with B = 1.
        const GridSpec spec{8, 8, 1};
        const Wireframe wf = make_wf(8, 8, {{{2, 6.5}, {2, 0.5}}});
        const SixDFieldMap map = encode_6d(wf, spec, {6.0});
        const auto& cell = map.at(3, 0);
        REQUIRE(cell.has_value());
        CHECK(cell->v0.x == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(cell->v0.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(cell->v1.x == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(cell->v1.y == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(cell->v2.x == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(cell->v2.y == doctest::Approx(-3.0).epsilon(1e-12));
    }
    SUBCASE("decode_6d is the exact displacement identity") {
        const GridSpec big{512, 512, 4};
        const Wireframe wf = synth_scene(3, big, 10, 40.0, 24.0);
        const Wireframe coarse = to_coarse(wf, big);
        const Grid<int> support = assign_support(wf, big);
        const SixDFieldMap map = encode_6d(wf, big);
        int cells = 0;
        for (const LineProposal& p : decode_6d(map)) {
            const int idx = support.at(p.row, p.col);
            REQUIRE(idx >= 0);
            CHECK(same_unordered(p.seg, coarse.segment_geometry(idx), 1e-9));
            ++cells;
        }
        CHECK(cells > 100);
    }
    SUBCASE("4-D and 6-D decodes agree per pixel") {
        const GridSpec big{512, 512, 4};
        for (uint64_t seed = 40; seed < 45; ++seed) {
            const Wireframe wf = synth_scene(seed, big, 12, 40.0, 24.0);
            const auto four = decode(encode(wf, big), nullptr);
            const auto six = decode_6d(encode_6d(wf, big));
            REQUIRE(four.size() == six.size());
            for (size_t i = 0; i < four.size(); ++i) {
                CHECK(four[i].row == six[i].row);
                CHECK(four[i].col == six[i].col);
                CHECK(distance(four[i].seg.p1, six[i].seg.p1) < 1e-9);
                CHECK(distance(four[i].seg.p2, six[i].seg.p2) < 1e-9);
            }
        }
    }
    SUBCASE("endpoint residual vectors are parallel to the line") {
        const GridSpec big{512, 512, 4};
        const SixDFieldMap map = encode_6d(synth_scene(8, big, 10, 40.0, 24.0), big);
        for (int r = 0; r < big.rows(); ++r) {
            for (int c = 0; c < big.cols(); ++c) {
                const auto& cell = map.at(r, c);
                if (!cell) continue;
                const Point u = cell->v1 - cell->v0;
                const Point v = cell->v2 - cell->v0;
                CHECK(std::abs(u.x * v.y - u.y * v.x) <
                      1e-9 * (1.0 + norm(u)) * (1.0 + norm(v)));
            }
        }
    }
}

TEST_CASE("residual_gt") {
    const GridSpec spec{512, 512, 4};
    const Wireframe wf = synth_scene(21, spec, 10, 40.0, 24.0);
    const AttractionFieldMap gt = encode(wf, spec);
    SUBCASE("identical maps give a zero residual") {
        const ResidualMap res = residual_gt(gt, gt);
        for (double v : res.values.v) CHECK(v == 0.0);
    }
    SUBCASE("per-pixel absolute difference, elementwise oracle") {
        AttractionFieldMap pred = gt;
        Rng rng(5);
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                if (pred.is_background(r, c)) continue;
                pred.channels.at(0, r, c) =
                    std::clamp(pred.channels.at(0, r, c) + 0.1 * rng.gaussian(), 1e-6, 1.0);
            }
        }
        const ResidualMap res = residual_gt(gt, pred);
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                if (gt.is_background(r, c)) {
                    CHECK(res.values.at(r, c) == 0.0);
                } else {
                    CHECK(res.values.at(r, c) ==
                          std::abs(gt.channels.at(0, r, c) - pred.channels.at(0, r, c)));
                }
            }
        }
    }
    SUBCASE("spec mismatch throws") {
        const GridSpec other{256, 256, 4};
        const AttractionFieldMap small = encode(synth_scene(1, other, 5, 30.0, 16.0), other);
        CHECK_THROWS_AS(residual_gt(gt, small), InvariantError);
    }
    SUBCASE("single-pixel normalized difference") {
        AttractionFieldMap a{GridSpec{4, 4, 1}, MultiGrid(4, 4, 4)};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) a.channels.at(0, r, c) = -1.0;
        }
        AttractionFieldMap b = a;
        a.channels.at(0, 1, 1) = 0.4;
        b.channels.at(0, 1, 1) = 0.6;
        const ResidualMap res = residual_gt(a, b);
        CHECK(res.values.at(1, 1) == doctest::Approx(0.2).epsilon(1e-12));
    }
}

TEST_CASE("map container round trip") {
    const GridSpec spec{512, 512, 4};
    const Wireframe wf = synth_scene(17, spec, 10, 40.0, 24.0);
    SUBCASE("field map through float32 storage") {
        const AttractionFieldMap afm = encode(wf, spec);
        const std::string path = temp_path("afm.bin");
        save_afm(afm, path);
        const AttractionFieldMap back = load_afm(path);
        CHECK(back.spec == spec);
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                CHECK(back.is_background(r, c) == afm.is_background(r, c));
                for (int ch = 0; ch < 4; ++ch) {
                    CHECK(back.channels.at(ch, r, c) ==
                          doctest::Approx(afm.channels.at(ch, r, c)).epsilon(1e-6));
                }
            }
        }
    }
    SUBCASE("residual map") {
        const ResidualMap res = residual_gt(encode(wf, spec), encode(wf, spec));
        const std::string path = temp_path("res.bin");
        save_residual(res, path);
        const ResidualMap back = load_residual(path);
        CHECK(back.spec == spec);
        for (size_t i = 0; i < res.values.v.size(); ++i) {
            CHECK(back.values.v[i] == doctest::Approx(res.values.v[i]).epsilon(1e-6));
        }
    }
    SUBCASE("text dump is written") {
        const AttractionFieldMap afm = encode(wf, spec);
        const std::string path = temp_path("afm.txt");
        dump_grid_text(path, afm.spec, afm.channels);
        CHECK(std::filesystem::file_size(path) > 1000);
    }
    SUBCASE("bad magic is a data error") {
        const std::string path = temp_path("not_a_grid.bin");
        {
            std::ofstream os(path, std::ios::binary);
            os << "garbage garbage garbage";
        }
        CHECK_THROWS_AS(load_afm(path), DataError);
    }
}
