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

#include "wirefield/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "wirefield/errors.hpp"
#include "wirefield/grid_io.hpp"
#include "wirefield/rng.hpp"

namespace wirefield {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    grid.validate();
    codec.validate();
    match_cfg.validate();
    verify_cfg.validate();
    loss.validate();
    metric_cfg.validate();
    if (junction_topk < 1) throw InvariantError("pipeline config: junction_topk must be >= 1");
}

FeatureMap stack_features(const AttractionFieldMap& afm, const JunctionMaps& junctions) {
    if (!(afm.spec == junctions.spec)) throw InvariantError("stack_features: spec mismatch");
    FeatureMap f{afm.spec, MultiGrid(7, afm.spec.rows(), afm.spec.cols())};
    for (int r = 0; r < f.channels.rows; ++r) {
        for (int c = 0; c < f.channels.cols; ++c) {
            for (int ch = 0; ch < 4; ++ch) f.channels.at(ch, r, c) = afm.channels.at(ch, r, c);
            f.channels.at(4, r, c) = junctions.mask.at(r, c);
            f.channels.at(5, r, c) = junctions.offset.at(0, r, c);
            f.channels.at(6, r, c) = junctions.offset.at(1, r, c);
        }
    }
    return f;
}

namespace {

// Channel clamp ranges for noisy predictions. Distances stay strictly
// positive, angle channels stay inside their normalized intervals.
constexpr double kDistFloor = 1e-4;

double clamp_channel(int ch, double v) {
    switch (ch) {
        case 0: return std::clamp(v, kDistFloor, 1.0);
        case 1: return std::clamp(v, 0.0, 1.0 - 1e-9);
        case 2: return std::clamp(v, 1e-6, 1.0 - 1e-6);
        default: return std::clamp(v, 0.0, 1.0 - 1e-6);
    }
}

PredictionMaps oracle_maps(const Wireframe& wf, const GridSpec& spec, const CodecConfig& cfg) {
    PredictionMaps maps;
    maps.afm = encode(wf, spec, cfg);
    maps.residual = zero_residual(spec);
    maps.junctions = encode_junctions(wf, spec);
    maps.features = stack_features(maps.afm, maps.junctions);
    return maps;
}

PredictionMaps noisy_maps(const Wireframe& wf, const Predictor& p, const GridSpec& spec,
                          const CodecConfig& cfg) {
    PredictionMaps maps = oracle_maps(wf, spec, cfg);
    const AttractionFieldMap gt_afm = maps.afm;
    Rng rng(p.seed);

    for (int r = 0; r < spec.rows(); ++r) {
        for (int c = 0; c < spec.cols(); ++c) {
            if (maps.afm.is_background(r, c)) continue;
            if (p.rho > 0.0 && rng.bernoulli(p.rho)) {
                for (int ch = 0; ch < 4; ++ch) {
                    maps.afm.channels.at(ch, r, c) = kBackgroundSample[ch];
                }
                continue;
            }
            if (p.sigma > 0.0) {
                for (int ch = 0; ch < 4; ++ch) {
                    double& v = maps.afm.channels.at(ch, r, c);
                    v = clamp_channel(ch, v + p.sigma * rng.gaussian());
                }
            }
        }
    }
    if (p.sigma > 0.0) {
        // Junction noise mirrors the field treatment: only occupied bins
        // are perturbed, so severity degrades the true peaks instead of
        // inventing structure on the empty background.
        for (int r = 0; r < spec.rows(); ++r) {
            for (int c = 0; c < spec.cols(); ++c) {
                double& m = maps.junctions.mask.at(r, c);
                if (m == 0.0) continue;
                m = std::clamp(m + p.sigma * rng.gaussian(), 0.0, 1.0);
                for (int ch = 0; ch < 2; ++ch) {
                    double& o = maps.junctions.offset.at(ch, r, c);
                    o = std::clamp(o + p.sigma * rng.gaussian(), -0.5, 0.5 - 1e-9);
                }
            }
        }
    }
    maps.residual = residual_gt(gt_afm, maps.afm);
    maps.features = stack_features(maps.afm, maps.junctions);
    return maps;
}

PredictionMaps file_maps(const Predictor& p, const GridSpec& spec) {
    PredictionMaps maps;
    maps.afm = load_afm(p.afm_path);
    if (!(maps.afm.spec == spec)) throw DataError("file predictor: field map spec mismatch");
    maps.residual =
        p.residual_path.empty() ? zero_residual(spec) : load_residual(p.residual_path);
    if (!(maps.residual.spec == spec)) throw DataError("file predictor: residual spec mismatch");
    maps.junctions = load_junction_maps(p.junction_path);
    if (!(maps.junctions.spec == spec)) {
        throw DataError("file predictor: junction map spec mismatch");
    }
    if (p.feature_path.empty()) {
        maps.features = stack_features(maps.afm, maps.junctions);
    } else {
        maps.features.channels = read_grid_file(p.feature_path, &maps.features.spec);
        if (!(maps.features.spec == spec)) {
            throw DataError("file predictor: feature map spec mismatch");
        }
    }
    return maps;
}

}  // namespace

PredictionMaps predict(const Wireframe& wf, const Predictor& predictor, const GridSpec& spec,
                       const CodecConfig& cfg) {
    spec.validate();
    cfg.validate();
    switch (predictor.kind) {
        case PredictorKind::oracle: return oracle_maps(wf, spec, cfg);
        case PredictorKind::noisy: return noisy_maps(wf, predictor, spec, cfg);
        case PredictorKind::file: return file_maps(predictor, spec);
    }
    throw InvariantError("predict: unknown predictor kind");
}

ScoredWireframe parse(const PredictionMaps& maps, const PipelineConfig& cfg, const Scorer& scorer,
                      ParseStats* stats) {
    cfg.validate();
    const GridSpec& spec = maps.afm.spec;

    ProposalSet proposals;
    proposals.spec = spec;
    proposals.segments = decode(maps.afm, &maps.residual, cfg.codec);
    proposals.junctions = decode_junctions(maps.junctions, cfg.junction_topk, cfg.offset_scale);

    const ProposalSet refined = match(proposals, cfg.match_cfg);
    if (stats) {
        stats->junction_proposals = static_cast<int>(proposals.junctions.size());
        stats->line_proposals_decoded = static_cast<int>(proposals.segments.size());
        stats->line_proposals_verified = static_cast<int>(refined.segments.size());
    }

    ScoredWireframe out;
    out.width = spec.image_w;
    out.height = spec.image_h;
    for (const JunctionProposal& jp : refined.junctions) {
        out.junctions.push_back(jp.position);
        out.junction_scores.push_back(jp.score);
    }
    for (const LineProposal& lp : refined.segments) {
        out.segments.emplace_back(lp.junction_a, lp.junction_b);
        out.segment_scores.push_back(scorer.score(loi_pool(lp.seg, maps.features, cfg.verify_cfg)));
    }

    // Noisy offsets can land two surviving junctions on (numerically) the
    // same point; merge them so the output satisfies the wireframe
    // invariants.
    std::vector<int> remap(out.junctions.size());
    std::vector<Point> merged;
    std::vector<double> merged_scores;
    for (size_t j = 0; j < out.junctions.size(); ++j) {
        int target = -1;
        for (size_t k = 0; k < merged.size(); ++k) {
            if (distance(out.junctions[j], merged[k]) <= kJunctionDedupTolerance) {
                target = static_cast<int>(k);
                break;
            }
        }
        if (target < 0) {
            target = static_cast<int>(merged.size());
            merged.push_back(out.junctions[j]);
            merged_scores.push_back(out.junction_scores[j]);
        } else {
            merged_scores[target] = std::max(merged_scores[target], out.junction_scores[j]);
        }
        remap[j] = target;
    }
    if (merged.size() != out.junctions.size()) {
        std::map<std::pair<int, int>, double> best;
        for (size_t s = 0; s < out.segments.size(); ++s) {
            const int a = remap[out.segments[s].first];
            const int b = remap[out.segments[s].second];
            if (a == b) continue;
            const auto key = std::minmax(a, b);
            auto it = best.find(key);
            if (it == best.end() || out.segment_scores[s] > it->second) {
                best[key] = out.segment_scores[s];
            }
        }
        out.junctions = std::move(merged);
        out.junction_scores = std::move(merged_scores);
        out.segments.clear();
        out.segment_scores.clear();
        std::vector<char> used(out.junctions.size(), 0);
        for (const auto& [key, score] : best) {
            out.segments.emplace_back(key.first, key.second);
            out.segment_scores.push_back(score);
            used[key.first] = used[key.second] = 1;
        }
        // Drop junctions orphaned by degenerate-segment removal.
        std::vector<int> remap2(out.junctions.size(), -1);
        std::vector<Point> kept;
        std::vector<double> kept_scores;
        for (size_t j = 0; j < out.junctions.size(); ++j) {
            if (!used[j]) continue;
            remap2[j] = static_cast<int>(kept.size());
            kept.push_back(out.junctions[j]);
            kept_scores.push_back(out.junction_scores[j]);
        }
        for (auto& [a, b] : out.segments) {
            a = remap2[a];
            b = remap2[b];
        }
        out.junctions = std::move(kept);
        out.junction_scores = std::move(kept_scores);
    }

    validate_scored_wireframe(out);
    return out;
}

ScoredWireframe parse(const Wireframe& wf, const Predictor& predictor, const PipelineConfig& cfg,
                      const Scorer& scorer, ParseStats* stats) {
    return parse(predict(wf, predictor, cfg.grid, cfg.codec), cfg, scorer, stats);
}

std::string run_log_text(const RunResult& result) {
    std::ostringstream os;
    os << "scene junction_proposals line_proposals_verified gt_lines\n";
    double mean_j = 0.0;
    double mean_p = 0.0;
    double mean_g = 0.0;
    for (const SceneCounts& c : result.counts) {
        os << c.name << ' ' << c.junction_proposals << ' ' << c.line_proposals_verified << ' '
           << c.gt_lines << '\n';
        mean_j += c.junction_proposals;
        mean_p += c.line_proposals_verified;
        mean_g += c.gt_lines;
    }
    if (!result.counts.empty()) {
        const double n = static_cast<double>(result.counts.size());
        char buf[120];
        std::snprintf(buf, sizeof buf, "mean %.3f %.3f %.3f\n", mean_j / n, mean_p / n,
                      mean_g / n);
        os << buf;
    }
    for (const std::string& f : result.failed_scenes) os << "failed " << f << '\n';
    return os.str();
}

RunResult run_eval(const std::string& dataset_dir, const std::string& out_dir,
                   const PipelineConfig& cfg, const Predictor& predictor, const Scorer& scorer,
                   int threads) {
    cfg.validate();
    if (!fs::is_directory(dataset_dir)) throw DataError("not a directory: " + dataset_dir);
    std::vector<fs::path> scene_paths;
    for (const auto& entry : fs::directory_iterator(dataset_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            scene_paths.push_back(entry.path());
        }
    }
    std::sort(scene_paths.begin(), scene_paths.end());

    fs::create_directories(fs::path(out_dir) / "parsed");

    struct SceneOutcome {
        bool ok = false;
        std::string error;
        Wireframe gt;
        ScoredWireframe parsed;
        ParseStats stats;
    };
    auto process = [&](const fs::path& path) {
        SceneOutcome outcome;
        try {
            outcome.gt = load_wireframe(path.string());
            outcome.parsed = parse(outcome.gt, predictor, cfg, scorer, &outcome.stats);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        return outcome;
    };

    std::vector<SceneOutcome> outcomes(scene_paths.size());
    if (threads <= 1) {
        for (size_t i = 0; i < scene_paths.size(); ++i) outcomes[i] = process(scene_paths[i]);
    } else {
        // Scene-level parallelism; aggregation stays in name order.
        std::vector<std::future<SceneOutcome>> futures(scene_paths.size());
        size_t next = 0;
        while (next < scene_paths.size()) {
            const size_t batch = std::min<size_t>(threads, scene_paths.size() - next);
            for (size_t i = 0; i < batch; ++i) {
                futures[next + i] =
                    std::async(std::launch::async, process, scene_paths[next + i]);
            }
            for (size_t i = 0; i < batch; ++i) outcomes[next + i] = futures[next + i].get();
            next += batch;
        }
    }

    RunResult result;
    std::vector<ScoredWireframe> predictions;
    std::vector<Wireframe> gts;
    for (size_t i = 0; i < scene_paths.size(); ++i) {
        const std::string name = scene_paths[i].filename().string();
        if (!outcomes[i].ok) {
            result.failed_scenes.push_back(name + ": " + outcomes[i].error);
            continue;
        }
        save_wireframe(outcomes[i].parsed, (fs::path(out_dir) / "parsed" / name).string());
        predictions.push_back(std::move(outcomes[i].parsed));
        gts.push_back(std::move(outcomes[i].gt));
        result.counts.push_back({name, outcomes[i].stats.junction_proposals,
                                 outcomes[i].stats.line_proposals_verified,
                                 static_cast<int>(gts.back().segments.size())});
    }

    result.report = evaluate(predictions, gts, cfg.metric_cfg);

    std::ofstream report_os(fs::path(out_dir) / "report.txt");
    report_os << eval_report_text(result.report);
    std::ofstream log_os(fs::path(out_dir) / "run_log.txt");
    log_os << run_log_text(result);
    for (const auto& [name, curve] : result.report.pr_curves) {
        write_pr_csv((fs::path(out_dir) / ("pr_" + name + ".csv")).string(), curve);
    }
    return result;
}

namespace {

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DataError("config: bad number in " + key + ": " + item);
        }
    }
    if (out.empty()) throw DataError("config: empty list for " + key);
    return out;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path);
    PipelineConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw DataError(path + ":" + std::to_string(line_no) + ": expected key = value");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const size_t b = s.find_first_not_of(" \t\r");
            const size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        try {
            if (key == "image_w") cfg.grid.image_w = std::stoi(value);
            else if (key == "image_h") cfg.grid.image_h = std::stoi(value);
            else if (key == "downsample") cfg.grid.downsample = std::stoi(value);
            else if (key == "d_max") cfg.codec.d_max = std::stod(value);
            else if (key == "tau") cfg.match_cfg.tau = std::stod(value);
            else if (key == "s") cfg.verify_cfg.s = std::stoi(value);
            else if (key == "pool_window") cfg.verify_cfg.pool_window = std::stoi(value);
            else if (key == "eta") cfg.verify_cfg.eta = std::stod(value);
            else if (key == "n") cfg.verify_cfg.n = std::stoi(value);
            else if (key == "lambda_msk") cfg.loss.lambda_msk = std::stod(value);
            else if (key == "lambda_off") cfg.loss.lambda_off = std::stod(value);
            else if (key == "sap_thresholds")
                cfg.metric_cfg.sap_thresholds = parse_double_list(value, key);
            else if (key == "junc_thresholds")
                cfg.metric_cfg.junc_thresholds = parse_double_list(value, key);
            else if (key == "eval_w") cfg.metric_cfg.eval_w = std::stoi(value);
            else if (key == "eval_h") cfg.metric_cfg.eval_h = std::stoi(value);
            else if (key == "heatmap_tolerance")
                cfg.metric_cfg.heatmap_tolerance = std::stod(value);
            else if (key == "heatmap_threshold_count")
                cfg.metric_cfg.heatmap_threshold_count = std::stoi(value);
            else if (key == "topk") cfg.junction_topk = std::stoi(value);
            else if (key == "offset_scale") cfg.offset_scale = std::stod(value);
            else throw DataError(path + ": unknown config key: " + key);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad value for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace wirefield
