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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clipflow {

using frame_t = std::int64_t;

/// Parameters of the timestep-aware dynamic window scheduler.
///
/// A valid parameter set satisfies
///   1 <= overlap < min_clip <= window   (forward progress per clip)
///   window - max_offset >= min_clip     (first clip never shrinks below
///                                        min_clip between offset resets)
///   shift_step >= 1, max_offset >= 0, total_len >= 1, num_steps >= 1
struct SchedulerParams {
    frame_t total_len = 0;   // l: frames in the full sequence
    frame_t window = 0;      // f: window length
    frame_t overlap = 0;     // o: frames shared by consecutive clips
    frame_t shift_step = 0;  // p: per-timestep offset increment
    frame_t max_offset = 0;  // m: offset value that triggers a reset
    frame_t min_clip = 0;    // n: smallest clip ever denoised
    frame_t num_steps = 0;   // T: denoising timesteps
};

/// Half-open frame span [start, end) denoised as one unit.
struct ClipWindow {
    frame_t start = 0;
    frame_t end = 0;

    frame_t length() const { return end - start; }
    bool operator==(const ClipWindow&) const = default;
};

/// All clip windows of one denoising timestep, in ascending start order.
struct TimestepPlan {
    frame_t step = 0;        // t, counting num_steps .. 1
    frame_t alpha_used = 0;  // shift offset this timestep was planned with
    std::vector<ClipWindow> clips;

    bool operator==(const TimestepPlan&) const = default;
};

/// The full plan: one TimestepPlan per timestep, t = T sequence down to 1.
struct DenoiseSchedule {
    SchedulerParams params;
    std::vector<TimestepPlan> plans;
};

/// Every violated parameter constraint, with the offending values.
/// Empty result means the parameter set is valid.
inline std::vector<std::string> validate_params(const SchedulerParams& p) {
    std::vector<std::string> errs;
    auto num = [](frame_t v) { return std::to_string(v); };
    if (p.total_len < 1) {
        errs.push_back("l < 1 (l=" + num(p.total_len) + ")");
    }
    if (p.overlap < 1) {
        errs.push_back("o < 1 (o=" + num(p.overlap) + ")");
    }
    if (p.overlap >= p.min_clip) {
        errs.push_back("o >= n (o=" + num(p.overlap) + ", n=" +
                       num(p.min_clip) + ")");
    }
    if (p.min_clip > p.window) {
        errs.push_back("n > f (n=" + num(p.min_clip) + ", f=" +
                       num(p.window) + ")");
    }
    if (p.max_offset < 0) {
        errs.push_back("m < 0 (m=" + num(p.max_offset) + ")");
    }
    if (p.window - p.max_offset < p.min_clip) {
        errs.push_back("f-m < n (f=" + num(p.window) + ", m=" +
                       num(p.max_offset) + ", n=" + num(p.min_clip) + ")");
    }
    if (p.shift_step < 1) {
        errs.push_back("p < 1 (p=" + num(p.shift_step) + ")");
    }
    if (p.num_steps < 1) {
        errs.push_back("T < 1 (T=" + num(p.num_steps) + ")");
    }
    return errs;
}

inline void require_valid(const SchedulerParams& p) {
    const auto errs = validate_params(p);
    if (!errs.empty()) {
        std::string msg = "invalid scheduler params: ";
        for (std::size_t i = 0; i < errs.size(); ++i) {
            if (i) {
                msg += "; ";
            }
            msg += errs[i];
        }
        throw std::invalid_argument(msg);
    }
}

/// Plans the clip windows of a single timestep for a given shift offset.
///
/// The first clip starts at max(0, -alpha) but keeps its unshifted end
/// (window - alpha), so increasing the offset genuinely moves every window
/// boundary left. Subsequent clips advance by (window - overlap); the final
/// clip is pinned to end exactly at total_len and, when that would make it
/// shorter than min_clip, extends backwards to min_clip frames, which
/// enlarges its overlap with the clip before it. Sequences no longer than
/// one window are planned as the single clip [0, total_len).
inline TimestepPlan plan_timestep(const SchedulerParams& p, frame_t alpha,
                                  frame_t step = 0) {
    require_valid(p);
    if (alpha < 0 || alpha > p.max_offset) {
        throw std::invalid_argument(
            "alpha out of range [0, m]: alpha=" + std::to_string(alpha) +
            ", m=" + std::to_string(p.max_offset));
    }

    TimestepPlan plan;
    plan.step = step;
    plan.alpha_used = alpha;

    const frame_t l = p.total_len;
    const frame_t f = p.window;
    if (l <= f) {
        plan.clips.push_back({0, l});
        return plan;
    }

    frame_t e = f - alpha;  // end of the shifted first window
    frame_t s = 0;          // max(0, -alpha): no rolling past the start
    plan.clips.push_back({s, e});
    while (e < l) {
        s = e - p.overlap;
        if (s + f < l) {
            e = s + f;
        } else {
            e = l;
            if (e - s < p.min_clip) {
                s = std::max<frame_t>(0, e - p.min_clip);
            }
        }
        plan.clips.push_back({s, e});
    }
    return plan;
}

/// Plans all timesteps t = T .. 1. The shift offset starts at zero, grows
/// by shift_step after each timestep, and snaps back to zero before any
/// timestep where it exceeds max_offset.
inline DenoiseSchedule build_schedule(const SchedulerParams& p) {
    require_valid(p);
    DenoiseSchedule sched;
    sched.params = p;
    sched.plans.reserve(static_cast<std::size_t>(p.num_steps));
    frame_t alpha = 0;
    for (frame_t t = p.num_steps; t >= 1; --t) {
        if (alpha > p.max_offset) {
            alpha = 0;
        }
        sched.plans.push_back(plan_timestep(p, alpha, t));
        alpha += p.shift_step;
    }
    return sched;
}

/// Structural check of one plan against the scheduler invariants: exact
/// coverage of [0, l), clip ordering, per-clip length bounds, index range,
/// and pairwise overlap (exactly `o`, except the final pair which may
/// exceed it after a last-clip extension). Returns violations; empty = ok.
inline std::vector<std::string> check_plan(const SchedulerParams& p,
                                           const TimestepPlan& plan) {
    std::vector<std::string> errs;
    const frame_t l = p.total_len;
    if (plan.clips.empty()) {
        errs.push_back("plan has no clips");
        return errs;
    }
    std::vector<char> covered(static_cast<std::size_t>(l), 0);
    const frame_t min_len = std::min(p.min_clip, l);
    for (std::size_t i = 0; i < plan.clips.size(); ++i) {
        const ClipWindow& c = plan.clips[i];
        if (c.start < 0 || c.end > l || c.start >= c.end) {
            errs.push_back("clip " + std::to_string(i) + " out of range");
            continue;
        }
        if (c.length() > p.window || c.length() < min_len) {
            errs.push_back("clip " + std::to_string(i) + " length " +
                           std::to_string(c.length()) + " outside [" +
                           std::to_string(min_len) + ", " +
                           std::to_string(p.window) + "]");
        }
        if (i > 0 && plan.clips[i - 1].start >= c.start) {
            errs.push_back("clips not ordered by start at " +
                           std::to_string(i));
        }
        if (i > 0) {
            const frame_t ov = plan.clips[i - 1].end - c.start;
            const bool last_pair = (i + 1 == plan.clips.size());
            if (last_pair ? ov < p.overlap : ov != p.overlap) {
                errs.push_back("overlap between clips " +
                               std::to_string(i - 1) + " and " +
                               std::to_string(i) + " is " +
                               std::to_string(ov));
            }
        }
        for (frame_t k = c.start; k < c.end; ++k) {
            covered[static_cast<std::size_t>(k)] = 1;
        }
    }
    for (frame_t k = 0; k < l; ++k) {
        if (!covered[static_cast<std::size_t>(k)]) {
            errs.push_back("frame " + std::to_string(k) + " not covered");
            break;
        }
    }
    return errs;
}

inline std::vector<std::string> check_schedule(const DenoiseSchedule& s) {
    std::vector<std::string> errs;
    for (const TimestepPlan& plan : s.plans) {
        if (plan.alpha_used < 0 || plan.alpha_used > s.params.max_offset) {
            errs.push_back("t=" + std::to_string(plan.step) +
                           ": alpha_used out of range");
        }
        for (std::string& e : check_plan(s.params, plan)) {
            errs.push_back("t=" + std::to_string(plan.step) + ": " + e);
        }
    }
    return errs;
}

}  // namespace clipflow
