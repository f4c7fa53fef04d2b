// Shared test utilities: independent invariant oracles, deterministic
// fixture synthesis, and a tiny process runner for CLI checks. Everything
// here is deliberately written from the domain rules themselves, not by
// calling back into the code under test.
#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "clipflow/denoiser.hpp"
#include "clipflow/latents.hpp"
#include "clipflow/schedule.hpp"

namespace testutil {

// --- scheduler oracle ------------------------------------------------------

/// Independent per-frame check of the scheduler invariants. Walks every
/// frame index with a coverage bitmap and re-derives the pairwise overlap
/// and length bounds directly from the parameter definitions.
inline std::vector<std::string> plan_violations(
    const clipflow::SchedulerParams& p, const clipflow::TimestepPlan& plan) {
    std::vector<std::string> bad;
    const auto l = p.total_len;
    if (plan.clips.empty()) {
        bad.push_back("no clips");
        return bad;
    }
    std::vector<int> cover(static_cast<std::size_t>(l), 0);
    for (std::size_t i = 0; i < plan.clips.size(); ++i) {
        const auto& c = plan.clips[i];
        if (c.start < 0 || c.end > l) {
            bad.push_back("index out of range");
        }
        if (c.end <= c.start) {
            bad.push_back("empty clip");
            continue;
        }
        const auto len = c.end - c.start;
        if (len > p.window || len < std::min(p.min_clip, l)) {
            bad.push_back("length " + std::to_string(len) + " out of bounds");
        }
        for (auto k = std::max<clipflow::frame_t>(0, c.start);
             k < std::min(l, c.end); ++k) {
            ++cover[static_cast<std::size_t>(k)];
        }
        if (i > 0) {
            const auto& prev = plan.clips[i - 1];
            if (prev.start >= c.start) {
                bad.push_back("starts not ascending");
            }
            const auto shared = prev.end - c.start;
            if (i + 1 == plan.clips.size()) {
                if (shared < p.overlap) {
                    bad.push_back("final overlap " + std::to_string(shared) +
                                  " < o");
                }
            } else if (shared != p.overlap) {
                bad.push_back("overlap " + std::to_string(shared) + " != o");
            }
        }
    }
    for (std::size_t k = 0; k < cover.size(); ++k) {
        if (cover[k] == 0) {
            bad.push_back("frame " + std::to_string(k) + " uncovered");
            break;
        }
    }
    return bad;
}

/// Random valid parameter set (every invariant satisfied by construction).
inline clipflow::SchedulerParams random_params(std::mt19937_64& gen) {
    auto pick = [&gen](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(gen() %
                                              static_cast<std::uint64_t>(
                                                  hi - lo + 1));
    };
    clipflow::SchedulerParams p;
    p.overlap = pick(1, 12);
    p.min_clip = pick(p.overlap + 1, p.overlap + 12);
    p.window = pick(p.min_clip, p.min_clip + 40);
    p.max_offset = pick(0, p.window - p.min_clip);
    p.shift_step = pick(1, 10);
    p.total_len = pick(1, 400);
    p.num_steps = pick(1, 8);
    return p;
}

// --- test velocity models --------------------------------------------------

/// Velocity that diffuses each frame toward its in-clip neighbors
/// (discrete Laplacian, one-sided at clip edges). Frames never see values
/// beyond the clip, so chunk borders without overlap cannot smooth across.
inline clipflow::VelocityModel neighborhood_smoothing_model(
    double coupling = 1.0) {
    return [coupling](const clipflow::Latents& clip, double /*t*/,
                      const clipflow::ConditionSet& /*cond*/) {
        clipflow::Latents v(clip.frames, clip.dim);
        for (std::size_t i = 0; i < clip.frames; ++i) {
            for (std::size_t d = 0; d < clip.dim; ++d) {
                double acc = 0.0;
                int n = 0;
                if (i > 0) {
                    acc += clip.at(i - 1, d);
                    ++n;
                }
                if (i + 1 < clip.frames) {
                    acc += clip.at(i + 1, d);
                    ++n;
                }
                const double lap =
                    n ? acc - n * static_cast<double>(clip.at(i, d)) : 0.0;
                v.at(i, d) = static_cast<float>(coupling * lap);
            }
        }
        return v;
    };
}

/// Deterministic pseudo-velocity that depends on the clip's absolute
/// position (via the condition offset) using integer arithmetic only, so
/// results are exactly reproducible.
inline clipflow::VelocityModel offset_hash_model() {
    return [](const clipflow::Latents& clip, double /*t*/,
              const clipflow::ConditionSet& cond) {
        clipflow::Latents v(clip.frames, clip.dim);
        for (std::size_t i = 0; i < clip.frames; ++i) {
            for (std::size_t d = 0; d < clip.dim; ++d) {
                const auto h = static_cast<std::uint64_t>(cond.offset) * 31 +
                               i * 7 + d * 3;
                v.at(i, d) =
                    static_cast<float>(static_cast<double>(h % 13) / 16.0 -
                                       0.375);
            }
        }
        return v;
    };
}

// --- audio fixtures ---------------------------------------------------------

/// Mono PCM16 WAV bytes.
inline void write_wav_pcm16(const std::string& path,
                            const std::vector<std::int16_t>& samples,
                            std::uint32_t sample_rate) {
    std::ofstream f(path, std::ios::binary);
    auto u32 = [&f](std::uint32_t v) {
        f.write(reinterpret_cast<const char*>(&v), 4);
    };
    auto u16 = [&f](std::uint16_t v) {
        f.write(reinterpret_cast<const char*>(&v), 2);
    };
    const auto data_bytes =
        static_cast<std::uint32_t>(samples.size() * 2);
    f.write("RIFF", 4);
    u32(36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);  // PCM
    u16(1);  // mono
    u32(sample_rate);
    u32(sample_rate * 2);
    u16(2);
    u16(16);
    f.write("data", 4);
    u32(data_bytes);
    f.write(reinterpret_cast<const char*>(samples.data()), data_bytes);
}

/// Single-sample clicks every `period` samples (first click at `period`,
/// not at zero), silence elsewhere.
inline std::vector<std::int16_t> click_track(std::size_t total_samples,
                                             std::size_t period,
                                             std::int16_t amplitude = 29000) {
    std::vector<std::int16_t> s(total_samples, 0);
    for (std::size_t i = period; i < total_samples; i += period) {
        s[i] = amplitude;
    }
    return s;
}

// --- process runner ---------------------------------------------------------

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

/// Runs a command line, capturing combined output and the exit code.
inline CliResult run_command(const std::string& cmd) {
    CliResult result;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) {
        return result;
    }
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) {
        result.output.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    }
    return result;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
    return s;
}

}  // namespace testutil
