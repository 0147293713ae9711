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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "wirefield/grid_io.hpp"
#include "wirefield/pipeline.hpp"

using namespace wirefield;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct GlobalOptions {
    std::string config_path;
    uint64_t seed = 0;
    std::string out_dir = ".";
};

PipelineConfig effective_config(const GlobalOptions& global) {
    if (!global.config_path.empty()) return load_pipeline_config(global.config_path);
    return {};
}

Scorer scorer_or_default(const std::string& path, const PipelineConfig& cfg) {
    if (!path.empty()) return load_scorer(path);
    // Untrained fallback: every segment scores 0.5.
    return Scorer(7 * (cfg.verify_cfg.s / cfg.verify_cfg.pool_window), 32);
}

std::vector<fs::path> dataset_scenes(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw DataError("no .json scenes in " + dir);
    return paths;
}

// Per-scene training rows: refined proposals labeled against the truth,
// augmented, pooled into feature vectors.
void collect_training_samples(const Wireframe& wf, const PipelineConfig& cfg,
                              const Predictor& predictor, uint64_t draw_seed,
                              const std::vector<LineSegment>* file_negatives,
                              std::vector<TrainSample>* out) {
    const PredictionMaps maps = predict(wf, predictor, cfg.grid, cfg.codec);
    ProposalSet proposals;
    proposals.spec = cfg.grid;
    proposals.segments = decode(maps.afm, &maps.residual, cfg.codec);
    proposals.junctions = decode_junctions(maps.junctions, cfg.junction_topk, cfg.offset_scale);
    const ProposalSet refined = match(proposals, cfg.match_cfg);

    const Wireframe gt_coarse = to_coarse(wf, cfg.grid);
    const auto labeled = assign_labels(refined.segments, gt_coarse, cfg.verify_cfg);
    const SamplePools pools =
        augment_samples(labeled, gt_coarse, cfg.verify_cfg, file_negatives, draw_seed);
    for (const LabeledProposal& p : pools.positives) {
        out->push_back({loi_pool(p.segment, maps.features, cfg.verify_cfg), 1});
    }
    for (const LabeledProposal& p : pools.negatives) {
        out->push_back({loi_pool(p.segment, maps.features, cfg.verify_cfg), 0});
    }
}

double holdout_auc(const Scorer& scorer, const std::vector<TrainSample>& samples) {
    std::vector<double> pos, neg;
    for (const TrainSample& s : samples) {
        (s.label == 1 ? pos : neg).push_back(scorer.score(s.features));
    }
    if (pos.empty() || neg.empty()) return 0.0;
    double wins = 0.0;
    for (double p : pos) {
        for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

int run_synth(const GlobalOptions& global, int width, int height, int downsample, int segments,
              double min_len, double min_sep, double share_prob, int count,
              const std::string& out) {
    const GridSpec spec{width, height, downsample};
    if (count <= 1 && !out.empty()) {
        save_wireframe(synth_scene(global.seed, spec, segments, min_len, min_sep, share_prob),
                       out);
        std::cout << "wrote " << out << "\n";
        return kExitOk;
    }
    fs::create_directories(global.out_dir);
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04d.json", i);
        save_wireframe(
            synth_scene(global.seed + static_cast<uint64_t>(i), spec, segments, min_len,
                        min_sep, share_prob),
            (fs::path(global.out_dir) / name).string());
    }
    std::cout << "wrote " << count << " scenes to " << global.out_dir << "\n";
    return kExitOk;
}

int run_encode(const GlobalOptions& global, const std::string& in, const std::string& out_afm,
               const std::string& out_junc, const std::string& out_res, bool text) {
    const PipelineConfig cfg = effective_config(global);
    const Wireframe wf = load_wireframe(in);
    const AttractionFieldMap afm = encode(wf, cfg.grid, cfg.codec);
    const JunctionMaps junc = encode_junctions(wf, cfg.grid);
    if (!out_afm.empty()) {
        save_afm(afm, out_afm);
        if (text) dump_grid_text(out_afm + ".txt", afm.spec, afm.channels);
    }
    if (!out_junc.empty()) save_junction_maps(junc, out_junc);
    if (!out_res.empty()) save_residual(zero_residual(cfg.grid), out_res);
    std::cout << "encoded " << in << "\n";
    return kExitOk;
}

int run_decode(const GlobalOptions& global, const std::string& afm_path,
               const std::string& res_path, const std::string& junc_path,
               const std::string& out) {
    const PipelineConfig cfg = effective_config(global);
    const AttractionFieldMap afm = load_afm(afm_path);
    ResidualMap res = zero_residual(afm.spec);
    if (!res_path.empty()) res = load_residual(res_path);
    const std::vector<LineProposal> lines = decode(afm, &res, cfg.codec);

    nlohmann::json doc;
    doc["width"] = afm.spec.image_w;
    doc["height"] = afm.spec.image_h;
    nlohmann::json jl = nlohmann::json::array();
    const int B = afm.spec.downsample;
    for (const LineProposal& lp : lines) {
        jl.push_back({lp.seg.p1.x * B, lp.seg.p1.y * B, lp.seg.p2.x * B, lp.seg.p2.y * B});
    }
    doc["line_proposals"] = std::move(jl);
    if (!junc_path.empty()) {
        const JunctionMaps maps = load_junction_maps(junc_path);
        nlohmann::json jj = nlohmann::json::array();
        for (const JunctionProposal& jp :
             decode_junctions(maps, cfg.junction_topk, cfg.offset_scale)) {
            jj.push_back({jp.position.x, jp.position.y, jp.score});
        }
        doc["junction_proposals"] = std::move(jj);
    }
    std::ofstream os(out);
    if (!os) throw DataError("cannot open for writing: " + out);
    os << doc.dump(2) << "\n";
    std::cout << "decoded " << lines.size() << " line proposals to " << out << "\n";
    return kExitOk;
}

int run_parse(const GlobalOptions& global, const std::string& in, double sigma, double rho,
              const std::string& afm_path, const std::string& res_path,
              const std::string& junc_path, const std::string& scorer_path,
              const std::string& out) {
    const PipelineConfig cfg = effective_config(global);
    const Scorer scorer = scorer_or_default(scorer_path, cfg);
    ParseStats stats;
    ScoredWireframe parsed;
    if (!afm_path.empty()) {
        // Map-driven parse: no scene needed.
        if (junc_path.empty()) throw DataError("parse: --afm requires --junc");
        Predictor predictor;
        predictor.kind = PredictorKind::file;
        predictor.afm_path = afm_path;
        predictor.residual_path = res_path;
        predictor.junction_path = junc_path;
        parsed = parse(predict({}, predictor, cfg.grid, cfg.codec), cfg, scorer, &stats);
    } else {
        if (in.empty()) throw DataError("parse: need --in or --afm/--junc");
        const Wireframe wf = load_wireframe(in);
        Predictor predictor;
        if (sigma > 0.0 || rho > 0.0) {
            predictor.kind = PredictorKind::noisy;
            predictor.sigma = sigma;
            predictor.rho = rho;
            predictor.seed = global.seed;
        }
        parsed = parse(wf, predictor, cfg, scorer, &stats);
    }
    save_wireframe(parsed, out);
    std::cout << "junction_proposals " << stats.junction_proposals << "\n"
              << "line_proposals_decoded " << stats.line_proposals_decoded << "\n"
              << "line_proposals_verified " << stats.line_proposals_verified << "\n"
              << "segments " << parsed.segments.size() << "\n"
              << "wrote " << out << "\n";
    return kExitOk;
}

int run_train_scorer(const GlobalOptions& global, const std::string& dataset, double sigma,
                     double rho, int epochs, int hidden, double lr, double momentum,
                     int holdout, const std::string& negatives_path, const std::string& out) {
    const PipelineConfig cfg = effective_config(global);
    const std::vector<fs::path> scenes = dataset_scenes(dataset);
    const int holdout_n = std::min<int>(holdout, static_cast<int>(scenes.size()) - 1);

    // Optional pre-computed hard negatives (annotation schema, image px).
    std::vector<LineSegment> file_negatives;
    if (!negatives_path.empty()) {
        const Wireframe negs = to_coarse(load_wireframe(negatives_path), cfg.grid);
        for (size_t s = 0; s < negs.segments.size(); ++s) {
            file_negatives.push_back(negs.segment_geometry(static_cast<int>(s)));
        }
    }

    Predictor predictor;
    if (sigma > 0.0 || rho > 0.0) {
        predictor = {PredictorKind::noisy, sigma, rho, global.seed, "", "", "", ""};
    }
    std::vector<TrainSample> train, held;
    for (size_t i = 0; i < scenes.size(); ++i) {
        const Wireframe wf = load_wireframe(scenes[i].string());
        const uint64_t draw_seed = global.seed + 1000 + i;
        auto* sink = (static_cast<int>(i) < static_cast<int>(scenes.size()) - holdout_n)
                         ? &train
                         : &held;
        collect_training_samples(wf, cfg, predictor, draw_seed,
                                 file_negatives.empty() ? nullptr : &file_negatives, sink);
    }

    TrainOptions opts;
    opts.epochs = epochs;
    opts.hidden = hidden;
    opts.learning_rate = lr;
    opts.momentum = momentum;
    const Scorer scorer = train_reference_scorer(train, global.seed, opts);
    save_scorer(scorer, out);
    std::cout << "train_samples " << train.size() << "\n";
    if (!held.empty()) {
        std::cout << "holdout_samples " << held.size() << "\n"
                  << "holdout_auc " << holdout_auc(scorer, held) << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

int run_eval_cmd(const GlobalOptions& global, const std::string& dataset, double sigma,
                 double rho, const std::string& scorer_path, int threads) {
    const PipelineConfig cfg = effective_config(global);
    Predictor predictor;
    if (sigma > 0.0 || rho > 0.0) {
        predictor = {PredictorKind::noisy, sigma, rho, global.seed, "", "", "", ""};
    }
    const Scorer scorer = scorer_or_default(scorer_path, cfg);
    const RunResult result = run_eval(dataset, global.out_dir, cfg, predictor, scorer, threads);
    std::cout << eval_report_text(result.report) << run_log_text(result);
    return result.failed_scenes.empty() ? kExitOk : kExitData;
}

int run_loss(const GlobalOptions& global, const std::string& gt_path, double sigma, double rho,
             const std::string& afm_path, const std::string& res_path,
             const std::string& junc_path, const std::string& scorer_path) {
    const PipelineConfig cfg = effective_config(global);
    const Wireframe wf = load_wireframe(gt_path);

    Predictor predictor;
    if (!afm_path.empty()) {
        predictor.kind = PredictorKind::file;
        predictor.afm_path = afm_path;
        predictor.residual_path = res_path;
        predictor.junction_path = junc_path;
    } else if (sigma > 0.0 || rho > 0.0) {
        predictor = {PredictorKind::noisy, sigma, rho, global.seed, "", "", "", ""};
    }
    const PredictionMaps pred = predict(wf, predictor, cfg.grid, cfg.codec);
    const AttractionFieldMap gt_afm = encode(wf, cfg.grid, cfg.codec);
    const JunctionMaps gt_junc = encode_junctions(wf, cfg.grid);
    const ResidualMap gt_res = residual_gt(gt_afm, pred.afm);

    // Verification term: refined proposals scored and labeled against gt.
    ProposalSet proposals;
    proposals.spec = cfg.grid;
    proposals.segments = decode(pred.afm, &pred.residual, cfg.codec);
    proposals.junctions = decode_junctions(pred.junctions, cfg.junction_topk, cfg.offset_scale);
    const ProposalSet refined = match(proposals, cfg.match_cfg);
    const Wireframe gt_coarse = to_coarse(wf, cfg.grid);
    const auto labeled = assign_labels(refined.segments, gt_coarse, cfg.verify_cfg);
    const Scorer scorer = scorer_or_default(scorer_path, cfg);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const LabeledProposal& p : labeled) {
        scores.push_back(scorer.score(loi_pool(p.segment, pred.features, cfg.verify_cfg)));
        labels.push_back(p.label == ProposalLabel::positive ? 1 : 0);
    }
    if (scores.empty()) {
        scores.push_back(0.5);  // vacuous verification set
        labels.push_back(1);
    }
    const LossReport report = total_loss(gt_afm, pred.afm, gt_res, pred.residual, gt_junc,
                                         pred.junctions, scores, labels, cfg.loss);
    std::cout << loss_report_text(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "wirefield: line-segment field codec, wireframe parser and evaluation suite.\n"
        "Config file keys (--config, 'key = value' lines, '#' comments):\n"
        "  image_w image_h downsample   grid geometry\n"
        "  d_max                        field support radius (coarse px)\n"
        "  tau                          endpoint-junction match radius (coarse px)\n"
        "  s pool_window eta n          verification sampling parameters\n"
        "  lambda_msk lambda_off        junction loss weights\n"
        "  sap_thresholds junc_thresholds eval_w eval_h\n"
        "  heatmap_tolerance heatmap_threshold_count\n"
        "  topk offset_scale            junction decoding"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name

    GlobalOptions global;
    app.add_option("--config", global.config_path, "pipeline config file");
    app.add_option("--seed", global.seed, "seed for generators and predictors");
    app.add_option("--out-dir", global.out_dir, "output directory for multi-file commands");

    auto* synth = app.add_subcommand("synth", "generate synthetic annotation scenes");
    int width = 512, height = 512, downsample = 4, segments = 15, count = 1;
    double min_len = 40.0, min_sep = 24.0, share_prob = 0.3;
    std::string out_file;
    synth->add_option("--width", width);
    synth->add_option("--height", height);
    synth->add_option("--downsample", downsample);
    synth->add_option("--segments", segments);
    synth->add_option("--min-len", min_len);
    synth->add_option("--min-sep", min_sep);
    synth->add_option("--share-prob", share_prob);
    synth->add_option("--count", count, "number of scenes (writes to --out-dir)");
    synth->add_option("--out", out_file, "single-scene output path");

    auto* enc = app.add_subcommand("encode", "encode a scene into field + junction maps");
    std::string in_path, out_afm, out_junc, out_res;
    bool text_dump = false;
    enc->add_option("--in", in_path)->required();
    enc->add_option("--out-afm", out_afm);
    enc->add_option("--out-junc", out_junc);
    enc->add_option("--out-res", out_res, "write the (zero) ground-truth residual map");
    enc->add_flag("--text", text_dump, "also write a lossless text dump");

    auto* dec = app.add_subcommand("decode", "decode maps into raw proposals");
    std::string afm_path, res_path, junc_path, out_props;
    dec->add_option("--afm", afm_path)->required();
    dec->add_option("--res", res_path);
    dec->add_option("--junc", junc_path);
    dec->add_option("--out", out_props)->required();

    auto* par = app.add_subcommand("parse", "run the full parser on a scene or on maps");
    double sigma = 0.0, rho = 0.0;
    std::string scorer_path, parse_out, parse_in;
    par->add_option("--in", parse_in, "scene to parse (oracle/noisy predictor)");
    par->add_option("--sigma", sigma, "noisy predictor channel noise");
    par->add_option("--rho", rho, "noisy predictor foreground drop rate");
    par->add_option("--afm", afm_path, "parse serialized maps instead of a scene");
    par->add_option("--res", res_path, "residual map for --afm");
    par->add_option("--junc", junc_path, "junction maps for --afm");
    par->add_option("--scorer", scorer_path, "trained scorer weights");
    par->add_option("--out", parse_out)->required();

    auto* train = app.add_subcommand("train-scorer", "train the reference verifier");
    std::string dataset_dir, scorer_out, negatives_path;
    int epochs = 300, hidden = 32, holdout = 5;
    double lr = 2.0, momentum = 0.9;
    train->add_option("--dataset", dataset_dir)->required();
    train->add_option("--sigma", sigma);
    train->add_option("--rho", rho);
    train->add_option("--epochs", epochs);
    train->add_option("--hidden", hidden);
    train->add_option("--lr", lr);
    train->add_option("--momentum", momentum);
    train->add_option("--holdout", holdout, "scenes held out for the AUC report");
    train->add_option("--negatives", negatives_path,
                      "pre-computed negative segments (annotation schema)");
    train->add_option("--out", scorer_out)->required();

    auto* ev = app.add_subcommand("eval", "parse and evaluate a dataset directory");
    int threads = 1;
    ev->add_option("--dataset", dataset_dir)->required();
    ev->add_option("--sigma", sigma);
    ev->add_option("--rho", rho);
    ev->add_option("--scorer", scorer_path);
    ev->add_option("--threads", threads);

    auto* loss_cmd = app.add_subcommand("loss", "training losses of predictions vs a scene");
    std::string gt_path;
    loss_cmd->add_option("--gt", gt_path)->required();
    loss_cmd->add_option("--sigma", sigma);
    loss_cmd->add_option("--rho", rho);
    loss_cmd->add_option("--afm", afm_path, "predicted field map file");
    loss_cmd->add_option("--res", res_path, "predicted residual map file");
    loss_cmd->add_option("--junc", junc_path, "predicted junction maps file");
    loss_cmd->add_option("--scorer", scorer_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            return run_synth(global, width, height, downsample, segments, min_len, min_sep,
                             share_prob, count, out_file);
        }
        if (enc->parsed()) {
            return run_encode(global, in_path, out_afm, out_junc, out_res, text_dump);
        }
        if (dec->parsed()) {
            return run_decode(global, afm_path, res_path, junc_path, out_props);
        }
        if (par->parsed()) {
            return run_parse(global, parse_in, sigma, rho, afm_path, res_path, junc_path,
                             scorer_path, parse_out);
        }
        if (train->parsed()) {
            return run_train_scorer(global, dataset_dir, sigma, rho, epochs, hidden, lr,
                                    momentum, holdout, negatives_path, scorer_out);
        }
        if (ev->parsed()) {
            return run_eval_cmd(global, dataset_dir, sigma, rho, scorer_path, threads);
        }
        if (loss_cmd->parsed()) {
            return run_loss(global, gt_path, sigma, rho, afm_path, res_path, junc_path,
                            scorer_path);
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
