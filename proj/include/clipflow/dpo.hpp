// Copyright 2026 Clipflow Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace clipflow {

/// Per-clip evaluation scores feeding preference-pair selection.
struct ClipScores {
    double sync_c = 0.0;
    double hand_reward = 0.0;
    double video_reward = 0.0;
};

struct ScoreWeights {
    double w_sync = 1.0;
    double w_hand = 1.0;
    double w_video = 1.0;
};

struct PreferencePair {
    std::size_t winner = 0;
    std::size_t loser = 0;
};

inline void require_weights(const ScoreWeights& w) {
    if (w.w_sync < 0.0 || w.w_hand < 0.0 || w.w_video < 0.0 ||
        (w.w_sync == 0.0 && w.w_hand == 0.0 && w.w_video == 0.0)) {
        throw std::invalid_argument(
            "score weights must be nonnegative with at least one positive");
    }
}

inline double composite_score(const ClipScores& s, const ScoreWeights& w) {
    require_weights(w);
    return w.w_sync * s.sync_c + w.w_hand * s.hand_reward +
           w.w_video * s.video_reward;
}

/// Winner = argmax composite, loser = argmin; ties break toward the lowest
/// index. An all-equal candidate set carries no preference signal and is
/// rejected. At least two candidates are required (four in the usual
/// selection protocol).
inline PreferencePair select_pair(const std::vector<ClipScores>& candidates,
                                  const ScoreWeights& w) {
    if (candidates.size() < 2) {
        throw std::invalid_argument("select_pair: need at least 2 "
                                    "candidates");
    }
    std::size_t best = 0;
    std::size_t worst = 0;
    std::vector<double> comps(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        comps[i] = composite_score(candidates[i], w);
        if (!std::isfinite(comps[i])) {
            throw std::invalid_argument("select_pair: non-finite composite "
                                        "score at index " +
                                        std::to_string(i));
        }
        if (comps[i] > comps[best]) {
            best = i;
        }
        if (comps[i] < comps[worst]) {
            worst = i;
        }
    }
    if (comps[best] == comps[worst]) {
        throw std::invalid_argument(
            "select_pair: all composite scores equal, no preference signal");
    }
    return {best, worst};
}

/// -log(sigmoid(x)) via the softplus form, finite over |x| <= 700.
inline double neg_log_sigmoid(double x) {
    const double y = -x;  // softplus(-x)
    return std::max(y, 0.0) + std::log1p(std::exp(-std::abs(y)));
}

/// Pairwise preference objective
/// -log sigmoid(beta * [(logp_w_policy - logp_w_ref) -
///                      (logp_l_policy - logp_l_ref)]).
inline double dpo_loss(double logp_w_policy, double logp_w_ref,
                       double logp_l_policy, double logp_l_ref,
                       double beta) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("dpo_loss: beta must be positive");
    }
    const double vals[] = {logp_w_policy, logp_w_ref, logp_l_policy,
                           logp_l_ref};
    for (double v : vals) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("dpo_loss: non-finite log "
                                        "likelihood");
        }
    }
    const double margin =
        (logp_w_policy - logp_w_ref) - (logp_l_policy - logp_l_ref);
    return neg_log_sigmoid(beta * margin);
}

/// Inputs to the velocity-space preference loss: true, policy-predicted
/// and reference velocities for the preferred (w) and dispreferred (l)
/// samples, plus the timestep temperature beta_t.
struct FlowDpoInputs {
    Eigen::MatrixXd v_true_w;
    Eigen::MatrixXd v_pred_w;
    Eigen::MatrixXd v_ref_w;
    Eigen::MatrixXd v_true_l;
    Eigen::MatrixXd v_pred_l;
    Eigen::MatrixXd v_ref_l;
    double beta_t = 1.0;
};

/// -log sigmoid(-(beta_t/2) * [(|v^w - v_pred^w|^2 - |v^w - v_ref^w|^2)
///                           - (|v^l - v_pred^l|^2 - |v^l - v_ref^l|^2)]),
/// squared norms summed over all elements.
inline double flow_dpo_loss(const FlowDpoInputs& in) {
    if (!(in.beta_t > 0.0)) {
        throw std::invalid_argument("flow_dpo_loss: beta_t must be positive");
    }
    auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return a.rows() == b.rows() && a.cols() == b.cols();
    };
    if (!same(in.v_true_w, in.v_pred_w) || !same(in.v_true_w, in.v_ref_w) ||
        !same(in.v_true_l, in.v_pred_l) || !same(in.v_true_l, in.v_ref_l)) {
        throw std::invalid_argument("flow_dpo_loss: velocity shape "
                                    "mismatch");
    }
    const double winner_gap = (in.v_true_w - in.v_pred_w).squaredNorm() -
                              (in.v_true_w - in.v_ref_w).squaredNorm();
    const double loser_gap = (in.v_true_l - in.v_pred_l).squaredNorm() -
                             (in.v_true_l - in.v_ref_l).squaredNorm();
    const double x = -(in.beta_t / 2.0) * (winner_gap - loser_gap);
    return neg_log_sigmoid(x);
}

/// Low-rank residual weight update W + A B^T.
inline Eigen::MatrixXd lora_apply(const Eigen::MatrixXd& w,
                                  const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
    if (a.rows() != w.rows() || b.rows() != w.cols() ||
        a.cols() != b.cols()) {
        throw std::invalid_argument(
            "lora_apply: incompatible shapes, expected W m x n, A m x r, "
            "B n x r");
    }
    return w + a * b.transpose();
}

}  // namespace clipflow
