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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "clipflow/latents.hpp"
#include "clipflow/schedule.hpp"

namespace clipflow {

/// Conditioning payloads attached to a latent sequence. Per-frame channels
/// (audio, camera) are opaque row matrices with one row per frame; text and
/// image are single opaque vectors. `offset` is the index of the first frame
/// of this view within the full sequence -- zero for an unsliced set,
/// the clip start for views produced by slice().
struct ConditionSet {
    std::optional<Latents> audio;
    std::optional<Latents> camera;
    std::optional<std::vector<float>> text;
    std::optional<std::vector<float>> image;
    frame_t offset = 0;

    ConditionSet slice(frame_t start, frame_t end) const {
        ConditionSet out;
        const auto s = static_cast<std::size_t>(start);
        const auto e = static_cast<std::size_t>(end);
        if (audio) {
            out.audio = audio->slice_rows(s, e);
        }
        if (camera) {
            out.camera = camera->slice_rows(s, e);
        }
        out.text = text;
        out.image = image;
        out.offset = offset + start;
        return out;
    }

    void require_frames(std::size_t frames) const {
        if (audio && audio->frames != frames) {
            throw std::invalid_argument(
                "audio condition has " + std::to_string(audio->frames) +
                " frames, expected " + std::to_string(frames));
        }
        if (camera && camera->frames != frames) {
            throw std::invalid_argument(
                "camera condition has " + std::to_string(camera->frames) +
                " frames, expected " + std::to_string(frames));
        }
    }
};

/// Velocity field contract: (clip latents, flow time in [0,1], sliced
/// conditions) -> velocity of identical shape. Must be deterministic.
using VelocityModel =
    std::function<Latents(const Latents&, double, const ConditionSet&)>;

/// How overlapping clip writes are merged within one timestep.
///   kOverwrite: the clip that starts later wins on the shared frames.
///   kBlend:     linear crossfade across the shared frames; blend weights
///               of an overlapped frame always sum to one.
enum class FusionPolicy { kOverwrite, kBlend };

/// Mean squared error between a predicted velocity and the regression
/// target z1 - z0 of the linear-interpolation path.
inline double flow_matching_loss(const Latents& predicted, const Latents& z0,
                                 const Latents& z1) {
    require_same_shape(predicted, z0, "flow_matching_loss");
    require_same_shape(z0, z1, "flow_matching_loss");
    if (predicted.data.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.data.size(); ++i) {
        const double target =
            static_cast<double>(z1.data[i]) - z0.data[i];
        const double d = predicted.data[i] - target;
        acc += d * d;
    }
    return acc / static_cast<double>(predicted.data.size());
}

/// Point on the linear path: (1 - t) * z0 + t * z1, t in [0, 1].
inline Latents interpolate_path(const Latents& z0, const Latents& z1,
                                double t) {
    require_same_shape(z0, z1, "interpolate_path");
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("interpolate_path: t=" +
                                    std::to_string(t) + " outside [0, 1]");
    }
    Latents out(z0.frames, z0.dim);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = static_cast<float>((1.0 - t) * z0.data[i] +
                                         t * z1.data[i]);
    }
    return out;
}

/// One explicit Euler update z + dt * v.
inline Latents euler_step(const Latents& z, const Latents& v, double dt) {
    require_same_shape(z, v, "euler_step");
    Latents out(z.frames, z.dim);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = static_cast<float>(z.data[i] + dt * v.data[i]);
    }
    return out;
}

constexpr double kOracleTimeEps = 1e-6;  // clamp at the t -> 1 singularity

/// Analytic velocity field (target - z) / (1 - t) that transports any state
/// to `target` at flow time 1 under exact integration. The clip's position
/// within the full sequence is taken from the condition slice's offset.
inline VelocityModel oracle_point_velocity(Latents target) {
    return [target = std::move(target)](const Latents& clip, double t,
                                        const ConditionSet& cond) {
        const frame_t off = cond.offset;
        if (off < 0 ||
            static_cast<std::size_t>(off) + clip.frames > target.frames ||
            clip.dim != target.dim) {
            throw std::invalid_argument(
                "oracle_point_velocity: clip window outside target");
        }
        const double denom = std::max(1.0 - t, kOracleTimeEps);
        Latents v(clip.frames, clip.dim);
        for (std::size_t i = 0; i < clip.frames; ++i) {
            for (std::size_t d = 0; d < clip.dim; ++d) {
                const double diff =
                    static_cast<double>(
                        target.at(static_cast<std::size_t>(off) + i, d)) -
                    clip.at(i, d);
                v.at(i, d) = static_cast<float>(diff / denom);
            }
        }
        return v;
    };
}

namespace detail {

/// Blend weight profile of one clip, derived from the clip set alone so the
/// fused result does not depend on execution order. Weight is 1 in the clip
/// interior and ramps linearly over the frames shared with earlier-starting
/// (head) and later-starting (tail) clips; ramp values stay strictly inside
/// (0, 1) so every overlapped frame is a strict convex combination. For the
/// plain two-clip overlap of length k the head and tail ramps are exact
/// complements, (j+1)/(k+1) and (k-j)/(k+1), and sum to one.
inline double blend_weight(const std::vector<ClipWindow>& clips,
                           std::size_t clip_idx, frame_t frame) {
    const ClipWindow& c = clips[clip_idx];
    frame_t head_end = c.start;  // how far earlier clips reach into c
    frame_t tail_start = c.end;  // where the next clip starts inside c
    for (std::size_t j = 0; j < clips.size(); ++j) {
        if (j == clip_idx) {
            continue;
        }
        const ClipWindow& o = clips[j];
        if (o.start < c.start || (o.start == c.start && j < clip_idx)) {
            head_end = std::clamp(o.end, head_end, c.end);
        } else {
            tail_start = std::clamp(o.start, c.start, tail_start);
        }
    }
    double w = 1.0;
    if (frame < head_end) {
        const auto k = static_cast<double>(head_end - c.start);
        const auto j = static_cast<double>(frame - c.start);
        w = std::min(w, (j + 1.0) / (k + 1.0));
    }
    if (frame >= tail_start) {
        const auto k = static_cast<double>(c.end - tail_start);
        const auto j = static_cast<double>(frame - tail_start);
        w = std::min(w, (k - j) / (k + 1.0));
    }
    return w;
}

}  // namespace detail

/// Runs one denoising timestep: every clip reads the same entry buffer
/// (double buffering), applies a Euler update at flow time t, and the
/// per-clip results are merged into a fresh buffer by the fusion policy.
/// Both policies are functions of the clip set, not of clip evaluation
/// order, so frames outside overlap regions are trivially order-invariant.
inline Latents run_timestep(const VelocityModel& model,
                            const std::vector<ClipWindow>& clips, double t,
                            double dt, const Latents& cur,
                            const ConditionSet& cond, FusionPolicy fusion) {
    std::vector<Latents> updated(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const ClipWindow& w = clips[i];
        if (w.start < 0 || w.end > static_cast<frame_t>(cur.frames) ||
            w.start >= w.end) {
            throw std::invalid_argument("run_timestep: clip out of range");
        }
        const Latents clip_z =
            cur.slice_rows(static_cast<std::size_t>(w.start),
                           static_cast<std::size_t>(w.end));
        const Latents v = model(clip_z, t, cond.slice(w.start, w.end));
        if (!v.same_shape(clip_z)) {
            throw std::runtime_error(
                "velocity model output shape does not match clip");
        }
        if (!v.all_finite()) {
            throw std::runtime_error("velocity model produced non-finite "
                                     "values");
        }
        updated[i] = euler_step(clip_z, v, dt);
    }

    Latents next = cur;
    if (fusion == FusionPolicy::kOverwrite) {
        // Later-starting clips win: write in ascending (start, end) order.
        std::vector<std::size_t> order(clips.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) {
                      if (clips[a].start != clips[b].start) {
                          return clips[a].start < clips[b].start;
                      }
                      if (clips[a].end != clips[b].end) {
                          return clips[a].end < clips[b].end;
                      }
                      return a < b;
                  });
        for (std::size_t i : order) {
            const ClipWindow& w = clips[i];
            for (frame_t fr = w.start; fr < w.end; ++fr) {
                for (std::size_t d = 0; d < cur.dim; ++d) {
                    next.at(static_cast<std::size_t>(fr), d) =
                        updated[i].at(static_cast<std::size_t>(fr - w.start),
                                      d);
                }
            }
        }
    } else {
        std::vector<double> acc(cur.frames * cur.dim, 0.0);
        std::vector<double> wsum(cur.frames, 0.0);
        for (std::size_t i = 0; i < clips.size(); ++i) {
            const ClipWindow& w = clips[i];
            for (frame_t fr = w.start; fr < w.end; ++fr) {
                const double bw = detail::blend_weight(clips, i, fr);
                const auto row = static_cast<std::size_t>(fr);
                wsum[row] += bw;
                for (std::size_t d = 0; d < cur.dim; ++d) {
                    acc[row * cur.dim + d] +=
                        bw * updated[i].at(
                                 static_cast<std::size_t>(fr - w.start), d);
                }
            }
        }
        for (std::size_t fr = 0; fr < cur.frames; ++fr) {
            if (wsum[fr] > 0.0) {
                for (std::size_t d = 0; d < cur.dim; ++d) {
                    next.at(fr, d) = static_cast<float>(
                        acc[fr * cur.dim + d] / wsum[fr]);
                }
            }
        }
    }
    return next;
}

/// Executes a full schedule over a latent sequence. Discrete steps
/// k = T .. 1 map to flow times t_k = (T - k) / T with a uniform dt = 1/T,
/// integrating from noise (t = 0) toward data (t = 1). Timesteps run
/// strictly in sequence; within a timestep all clips read the entry buffer.
inline Latents run_windowed(const VelocityModel& model,
                            const DenoiseSchedule& schedule,
                            const Latents& z_init, const ConditionSet& cond,
                            FusionPolicy fusion) {
    const SchedulerParams& p = schedule.params;
    if (static_cast<frame_t>(z_init.frames) != p.total_len) {
        throw std::invalid_argument(
            "run_windowed: z_init has " + std::to_string(z_init.frames) +
            " frames, schedule expects " + std::to_string(p.total_len));
    }
    cond.require_frames(z_init.frames);
    const double steps = static_cast<double>(p.num_steps);
    Latents cur = z_init;
    for (const TimestepPlan& plan : schedule.plans) {
        const double t = (steps - static_cast<double>(plan.step)) / steps;
        cur = run_timestep(model, plan.clips, t, 1.0 / steps, cur, cond,
                           fusion);
    }
    return cur;
}

/// Reference executor: the same time grid with a single window [0, L).
inline Latents run_monolithic(const VelocityModel& model, frame_t num_steps,
                              const Latents& z_init,
                              const ConditionSet& cond) {
    if (num_steps < 1) {
        throw std::invalid_argument("run_monolithic: num_steps < 1");
    }
    cond.require_frames(z_init.frames);
    const std::vector<ClipWindow> whole = {
        {0, static_cast<frame_t>(z_init.frames)}};
    const double steps = static_cast<double>(num_steps);
    Latents cur = z_init;
    for (frame_t k = num_steps; k >= 1; --k) {
        const double t = (steps - static_cast<double>(k)) / steps;
        cur = run_timestep(model, whole, t, 1.0 / steps, cur, cond,
                           FusionPolicy::kOverwrite);
    }
    return cur;
}

/// Largest L2 jump between adjacent frames; a proxy for visible seams at
/// clip boundaries.
inline double seam_discontinuity(const Latents& z) {
    if (z.frames < 2) {
        throw std::invalid_argument("seam_discontinuity: need >= 2 frames");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < z.frames; ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < z.dim; ++d) {
            const double diff =
                static_cast<double>(z.at(i + 1, d)) - z.at(i, d);
            acc += diff * diff;
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

}  // namespace clipflow
