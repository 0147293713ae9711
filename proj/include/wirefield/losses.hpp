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

#include <string>
#include <vector>

#include "wirefield/hafm.hpp"
#include "wirefield/junction.hpp"

namespace wirefield {

struct LossConfig {
    double lambda_msk = 8.0;
    double lambda_off = 0.25;
    void validate() const {
        if (lambda_msk < 0.0 || lambda_off < 0.0) {
            throw InvariantError("loss config: weights must be >= 0");
        }
    }
};

struct LossReport {
    double l_ls = 0.0;
    double l_junc = 0.0;
    double l_ver = 0.0;
    double total = 0.0;
};

/// Field-map loss: the per-pixel l1 difference summed over channels and
/// averaged over ground-truth foreground pixels, for the attraction map
/// pair plus the residual map pair. Background pixels do not contribute.
double loss_ls(const AttractionFieldMap& gt_afm, const AttractionFieldMap& pred_afm,
               const ResidualMap& gt_res, const ResidualMap& pred_res);

/// lambda_msk * mean binary cross-entropy over all bins plus
/// lambda_off * mean l1 offset error over ground-truth-positive bins
/// (both offset components summed per bin). Predicted mask values are
/// clamped to [1e-7, 1 - 1e-7].
double loss_junc(const JunctionMaps& gt, const JunctionMaps& pred, const LossConfig& cfg);

/// Mean binary cross-entropy of verification scores against 0/1 labels.
/// Throws InvariantError on empty or mismatched inputs.
double loss_ver(const std::vector<double>& scores, const std::vector<int>& labels);

LossReport total_loss(const AttractionFieldMap& gt_afm, const AttractionFieldMap& pred_afm,
                      const ResidualMap& gt_res, const ResidualMap& pred_res,
                      const JunctionMaps& gt_junc, const JunctionMaps& pred_junc,
                      const std::vector<double>& scores, const std::vector<int>& labels,
                      const LossConfig& cfg);

/// Plain-text key-value record of a report.
std::string loss_report_text(const LossReport& report);

}  // namespace wirefield
