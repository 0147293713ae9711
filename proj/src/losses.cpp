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

#include "wirefield/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wirefield/errors.hpp"

namespace wirefield {

namespace {

constexpr double kBceEps = 1e-7;

double bce(double target, double predicted) {
    const double p = std::clamp(predicted, kBceEps, 1.0 - kBceEps);
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

}  // namespace

double loss_ls(const AttractionFieldMap& gt_afm, const AttractionFieldMap& pred_afm,
               const ResidualMap& gt_res, const ResidualMap& pred_res) {
    if (!(gt_afm.spec == pred_afm.spec) || !(gt_afm.spec == gt_res.spec) ||
        !(gt_afm.spec == pred_res.spec)) {
        throw InvariantError("loss_ls: spec mismatch");
    }
    double afm_sum = 0.0;
    double res_sum = 0.0;
    long fg = 0;
    for (int r = 0; r < gt_afm.spec.rows(); ++r) {
        for (int c = 0; c < gt_afm.spec.cols(); ++c) {
            if (gt_afm.is_background(r, c)) continue;
            ++fg;
            for (int ch = 0; ch < 4; ++ch) {
                afm_sum += std::abs(gt_afm.channels.at(ch, r, c) - pred_afm.channels.at(ch, r, c));
            }
            res_sum += std::abs(gt_res.values.at(r, c) - pred_res.values.at(r, c));
        }
    }
    if (fg == 0) return 0.0;
    return (afm_sum + res_sum) / static_cast<double>(fg);
}

double loss_junc(const JunctionMaps& gt, const JunctionMaps& pred, const LossConfig& cfg) {
    cfg.validate();
    if (!(gt.spec == pred.spec)) throw InvariantError("loss_junc: spec mismatch");

    double bce_sum = 0.0;
    double off_sum = 0.0;
    long bins = 0;
    long positive_bins = 0;
    for (int r = 0; r < gt.mask.rows; ++r) {
        for (int c = 0; c < gt.mask.cols; ++c) {
            ++bins;
            bce_sum += bce(gt.mask.at(r, c), pred.mask.at(r, c));
            if (gt.mask.at(r, c) > 0.0) {
                ++positive_bins;
                off_sum += std::abs(gt.offset.at(0, r, c) - pred.offset.at(0, r, c)) +
                           std::abs(gt.offset.at(1, r, c) - pred.offset.at(1, r, c));
            }
        }
    }
    const double mask_term = cfg.lambda_msk * bce_sum / static_cast<double>(bins);
    const double off_term =
        positive_bins > 0 ? cfg.lambda_off * off_sum / static_cast<double>(positive_bins) : 0.0;
    return mask_term + off_term;
}

double loss_ver(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty()) throw InvariantError("loss_ver: empty inputs");
    if (scores.size() != labels.size()) throw InvariantError("loss_ver: length mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        sum += bce(static_cast<double>(labels[i]), scores[i]);
    }
    return sum / static_cast<double>(scores.size());
}

LossReport total_loss(const AttractionFieldMap& gt_afm, const AttractionFieldMap& pred_afm,
                      const ResidualMap& gt_res, const ResidualMap& pred_res,
                      const JunctionMaps& gt_junc, const JunctionMaps& pred_junc,
                      const std::vector<double>& scores, const std::vector<int>& labels,
                      const LossConfig& cfg) {
    LossReport report;
    report.l_ls = loss_ls(gt_afm, pred_afm, gt_res, pred_res);
    report.l_junc = loss_junc(gt_junc, pred_junc, cfg);
    report.l_ver = loss_ver(scores, labels);
    report.total = report.l_ls + report.l_junc + report.l_ver;
    return report;
}

std::string loss_report_text(const LossReport& report) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "l_ls %.17g\nl_junc %.17g\nl_ver %.17g\ntotal %.17g\n",
                  report.l_ls, report.l_junc, report.l_ver, report.total);
    return buf;
}

}  // namespace wirefield
