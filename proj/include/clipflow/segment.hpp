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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace clipflow {

/// Mono audio signal.
struct AudioBuffer {
    std::vector<double> samples;
    double sample_rate = 0.0;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Onset-strength curve; values[k] describes the spectral energy increase
/// at analysis frame k, one frame every hop_seconds.
struct OnsetEnvelope {
    std::vector<double> values;
    double hop_seconds = 0.0;
};

struct Peak {
    std::size_t index = 0;
    double strength = 0.0;
};

struct Segment {
    double start = 0.0;
    double end = 0.0;
    bool operator==(const Segment&) const = default;
};

/// Bar-aligned segmentation of a piece: interior boundaries in seconds
/// (strictly ascending, strictly inside (0, duration)) and the derived
/// segments partitioning [0, duration).
struct SegmentPlan {
    double bpm = 0.0;
    double duration = 0.0;
    std::vector<double> boundaries;
    std::vector<Segment> segments;
};

/// One musical bar of four beats: 4 * 60 / bpm seconds.
inline double bar_duration(double bpm) {
    if (!(bpm > 0.0)) {
        throw std::invalid_argument("bar_duration: bpm must be positive");
    }
    return 4.0 * 60.0 / bpm;
}

/// Half-wave rectified spectral flux over Hann-windowed DFT frames:
/// values[k] = sum over bins of max(0, |X_k| - |X_{k-1}|), values[0] = 0.
inline OnsetEnvelope onset_strength(const AudioBuffer& audio,
                                    std::size_t frame_len = 1024,
                                    std::size_t hop = 256) {
    if (hop < 1 || frame_len < hop) {
        throw std::invalid_argument(
            "onset_strength: need frame_len >= hop >= 1");
    }
    if (!(audio.sample_rate > 0.0)) {
        throw std::invalid_argument("onset_strength: bad sample rate");
    }
    if (audio.samples.size() < frame_len) {
        throw std::invalid_argument("onset_strength: audio shorter than one "
                                    "frame");
    }
    const std::size_t num_frames =
        1 + (audio.samples.size() - frame_len) / hop;
    const std::size_t num_bins = frame_len / 2 + 1;

    std::vector<double> window(frame_len);
    for (std::size_t i = 0; i < frame_len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI *
                                          static_cast<double>(i) /
                                          static_cast<double>(frame_len -
                                                              1)));
    }

    // FFTW plan creation/destruction is not reentrant; executing a
    // private plan is.
    static std::mutex plan_mutex;

    double* in = fftw_alloc_real(frame_len);
    fftw_complex* out = fftw_alloc_complex(num_bins);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(frame_len), in, out,
                                    FFTW_ESTIMATE);
    }

    OnsetEnvelope env;
    env.hop_seconds = static_cast<double>(hop) / audio.sample_rate;
    env.values.assign(num_frames, 0.0);

    std::vector<double> prev_mag(num_bins, 0.0);
    std::vector<double> mag(num_bins, 0.0);
    for (std::size_t k = 0; k < num_frames; ++k) {
        const std::size_t off = k * hop;
        for (std::size_t i = 0; i < frame_len; ++i) {
            in[i] = audio.samples[off + i] * window[i];
        }
        fftw_execute(plan);
        double flux = 0.0;
        for (std::size_t b = 0; b < num_bins; ++b) {
            mag[b] = std::hypot(out[b][0], out[b][1]);
            flux += std::max(0.0, mag[b] - prev_mag[b]);
        }
        env.values[k] = k == 0 ? 0.0 : flux;
        prev_mag.swap(mag);
    }

    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return env;
}

/// Interior local maxima (env[i] > env[i-1] and env[i] >= env[i+1]),
/// greedily filtered so selected indices stay at least min_gap apart.
/// Stronger peaks are kept first; ties break toward the earlier index.
/// Returned in selection order.
inline std::vector<Peak> local_maxima(const OnsetEnvelope& env,
                                      std::size_t min_gap) {
    if (min_gap < 1) {
        throw std::invalid_argument("local_maxima: min_gap must be >= 1");
    }
    std::vector<Peak> candidates;
    for (std::size_t i = 1; i + 1 < env.values.size(); ++i) {
        if (env.values[i] > env.values[i - 1] &&
            env.values[i] >= env.values[i + 1]) {
            candidates.push_back({i, env.values[i]});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Peak& a, const Peak& b) {
                  if (a.strength != b.strength) {
                      return a.strength > b.strength;
                  }
                  return a.index < b.index;
              });
    std::vector<Peak> selected;
    for (const Peak& p : candidates) {
        bool clear = true;
        for (const Peak& s : selected) {
            const std::size_t gap = p.index > s.index ? p.index - s.index
                                                      : s.index - p.index;
            if (gap < min_gap) {
                clear = false;
                break;
            }
        }
        if (clear) {
            selected.push_back(p);
        }
    }
    return selected;
}

/// Plans bar-aligned boundaries: targets round(duration / bar) - 1 interior
/// cuts, placed on the strongest onset maxima at least min_gap_bars bars
/// apart (uses every candidate when fewer exist). Segments always partition
/// [0, duration).
inline SegmentPlan segment_music(const OnsetEnvelope& env, double bpm,
                                 double duration,
                                 double min_gap_bars = 0.5) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("segment_music: duration must be "
                                    "positive");
    }
    if (env.values.empty() || !(env.hop_seconds > 0.0)) {
        throw std::invalid_argument("segment_music: empty envelope");
    }
    const double bar = bar_duration(bpm);
    const auto target = static_cast<std::int64_t>(
        std::llround(duration / bar) - 1);
    const std::size_t k =
        target > 0 ? static_cast<std::size_t>(target) : 0;

    SegmentPlan plan;
    plan.bpm = bpm;
    plan.duration = duration;
    if (k > 0) {
        const auto min_gap = static_cast<std::size_t>(std::max<double>(
            1.0, std::ceil(bar * min_gap_bars / env.hop_seconds)));
        std::vector<Peak> peaks = local_maxima(env, min_gap);
        for (const Peak& p : peaks) {
            if (plan.boundaries.size() == k) {
                break;
            }
            const double t = static_cast<double>(p.index) * env.hop_seconds;
            if (t > 0.0 && t < duration) {
                plan.boundaries.push_back(t);
            }
        }
        std::sort(plan.boundaries.begin(), plan.boundaries.end());
    }
    double prev = 0.0;
    for (double b : plan.boundaries) {
        plan.segments.push_back({prev, b});
        prev = b;
    }
    plan.segments.push_back({prev, duration});
    return plan;
}

/// Verifies a plan against its envelope: ascending interior boundaries that
/// each sit on an envelope local maximum, segments partitioning
/// [0, duration), and -- when the full target count was achievable -- an
/// average segment duration within avg_tolerance of one bar.
inline std::vector<std::string> check_segment_plan(
    const SegmentPlan& plan, const OnsetEnvelope& env,
    double avg_tolerance = 0.25) {
    std::vector<std::string> errs;
    double prev = 0.0;
    for (std::size_t i = 0; i < plan.boundaries.size(); ++i) {
        const double b = plan.boundaries[i];
        if (b <= prev || b >= plan.duration) {
            errs.push_back("boundary " + std::to_string(i) +
                           " not strictly inside (0, duration) or not "
                           "ascending");
        }
        prev = b;
        const auto bin = static_cast<std::size_t>(
            std::llround(b / env.hop_seconds));
        const bool is_max = bin >= 1 && bin + 1 < env.values.size() &&
                            env.values[bin] > env.values[bin - 1] &&
                            env.values[bin] >= env.values[bin + 1];
        if (!is_max) {
            errs.push_back("boundary " + std::to_string(i) +
                           " is not on an onset local maximum");
        }
    }
    if (plan.segments.empty() || plan.segments.front().start != 0.0 ||
        plan.segments.back().end != plan.duration) {
        errs.push_back("segments do not span [0, duration)");
    }
    for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) {
        if (plan.segments[i].end != plan.segments[i + 1].start) {
            errs.push_back("segments not contiguous at " + std::to_string(i));
        }
    }
    const double bar = bar_duration(plan.bpm);
    const auto want = static_cast<std::int64_t>(
        std::llround(plan.duration / bar) - 1);
    if (want > 0 &&
        plan.boundaries.size() == static_cast<std::size_t>(want)) {
        const double avg = plan.duration /
                           static_cast<double>(plan.segments.size());
        if (std::abs(avg - bar) > avg_tolerance * bar) {
            errs.push_back("average segment duration " + std::to_string(avg) +
                           " deviates more than " +
                           std::to_string(avg_tolerance * 100.0) +
                           "% from one bar");
        }
    }
    return errs;
}

}  // namespace clipflow
