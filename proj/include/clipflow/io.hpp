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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clipflow/camera.hpp"
#include "clipflow/dpo.hpp"
#include "clipflow/errors.hpp"
#include "clipflow/json_writer.hpp"
#include "clipflow/latents.hpp"
#include "clipflow/schedule.hpp"
#include "clipflow/segment.hpp"

namespace clipflow {

// Binary artifacts are little-endian float32 with a fixed-size header.
static_assert(std::endian::native == std::endian::little,
              "binary latent formats are little-endian");

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t read_u32(std::istream& is, const std::string& what) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) {
        throw io_error("truncated header: " + what);
    }
    return v;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw io_error("cannot open output: " + path);
    }
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw io_error("cannot open input: " + path);
    }
    return f;
}

}  // namespace detail

// --- latent sequences: "LATS" magic, u32 L, u32 D, u32 reserved, L*D f32 ---

inline void write_latents(std::ostream& os, const Latents& z) {
    os.write("LATS", 4);
    detail::write_u32(os, static_cast<std::uint32_t>(z.frames));
    detail::write_u32(os, static_cast<std::uint32_t>(z.dim));
    detail::write_u32(os, 0);
    os.write(reinterpret_cast<const char*>(z.data.data()),
             static_cast<std::streamsize>(z.data.size() * sizeof(float)));
}

inline void write_latents(const std::string& path, const Latents& z) {
    auto f = detail::open_out(path);
    write_latents(f, z);
    if (!f) {
        throw io_error("failed writing: " + path);
    }
}

inline Latents read_latents(std::istream& is,
                            const std::string& what = "latents") {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "LATS", 4) != 0) {
        throw io_error("bad magic, expected LATS: " + what);
    }
    const std::uint32_t frames = detail::read_u32(is, what);
    const std::uint32_t dim = detail::read_u32(is, what);
    detail::read_u32(is, what);  // reserved
    Latents z(frames, dim);
    if (!is.read(reinterpret_cast<char*>(z.data.data()),
                 static_cast<std::streamsize>(z.data.size() *
                                              sizeof(float)))) {
        throw io_error("truncated latent payload: " + what);
    }
    return z;
}

inline Latents read_latents(const std::string& path) {
    auto f = detail::open_in(path);
    return read_latents(f, path);
}

// --- Plücker maps: "PLUK" magic, u32 L, u32 6, u32 H, u32 W, floats ------

inline void write_plucker(std::ostream& os, const PlueckerMap& map) {
    os.write("PLUK", 4);
    detail::write_u32(os, static_cast<std::uint32_t>(map.frames));
    detail::write_u32(os, 6);
    detail::write_u32(os, static_cast<std::uint32_t>(map.height));
    detail::write_u32(os, static_cast<std::uint32_t>(map.width));
    os.write(reinterpret_cast<const char*>(map.data.data()),
             static_cast<std::streamsize>(map.data.size() * sizeof(float)));
}

inline void write_plucker(const std::string& path, const PlueckerMap& map) {
    auto f = detail::open_out(path);
    write_plucker(f, map);
    if (!f) {
        throw io_error("failed writing: " + path);
    }
}

inline PlueckerMap read_plucker(std::istream& is,
                                const std::string& what = "plucker") {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PLUK", 4) != 0) {
        throw io_error("bad magic, expected PLUK: " + what);
    }
    const std::uint32_t frames = detail::read_u32(is, what);
    const std::uint32_t channels = detail::read_u32(is, what);
    const std::uint32_t h = detail::read_u32(is, what);
    const std::uint32_t w = detail::read_u32(is, what);
    if (channels != 6) {
        throw io_error("unexpected channel count in PLUK header: " + what);
    }
    PlueckerMap map(frames, h, w);
    if (!is.read(reinterpret_cast<char*>(map.data.data()),
                 static_cast<std::streamsize>(map.data.size() *
                                              sizeof(float)))) {
        throw io_error("truncated plucker payload: " + what);
    }
    return map;
}

inline PlueckerMap read_plucker(const std::string& path) {
    auto f = detail::open_in(path);
    return read_plucker(f, path);
}

// --- JSON documents -------------------------------------------------------

inline std::string schedule_to_json(const DenoiseSchedule& s) {
    JsonWriter w;
    w.begin_object();
    w.key("params");
    w.begin_object();
    w.kv("l", s.params.total_len);
    w.kv("f", s.params.window);
    w.kv("o", s.params.overlap);
    w.kv("p", s.params.shift_step);
    w.kv("m", s.params.max_offset);
    w.kv("n", s.params.min_clip);
    w.kv("T", s.params.num_steps);
    w.end_object();
    w.key("plans");
    w.begin_array();
    for (const TimestepPlan& plan : s.plans) {
        w.begin_object();
        w.kv("t", plan.step);
        w.kv("alpha", plan.alpha_used);
        w.key("clips");
        w.begin_array();
        for (const ClipWindow& c : plan.clips) {
            w.begin_array();
            w.value(c.start);
            w.value(c.end);
            w.end_array();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

inline DenoiseSchedule schedule_from_json(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        DenoiseSchedule s;
        const auto& p = j.at("params");
        s.params.total_len = p.at("l").get<frame_t>();
        s.params.window = p.at("f").get<frame_t>();
        s.params.overlap = p.at("o").get<frame_t>();
        s.params.shift_step = p.at("p").get<frame_t>();
        s.params.max_offset = p.at("m").get<frame_t>();
        s.params.min_clip = p.at("n").get<frame_t>();
        s.params.num_steps = p.at("T").get<frame_t>();
        for (const auto& jp : j.at("plans")) {
            TimestepPlan plan;
            plan.step = jp.at("t").get<frame_t>();
            plan.alpha_used = jp.at("alpha").get<frame_t>();
            for (const auto& jc : jp.at("clips")) {
                plan.clips.push_back(
                    {jc.at(0).get<frame_t>(), jc.at(1).get<frame_t>()});
            }
            s.plans.push_back(std::move(plan));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed schedule JSON: ") + e.what());
    }
}

inline std::string segment_plan_to_json(const SegmentPlan& plan) {
    JsonWriter w;
    w.begin_object();
    w.kv("bpm", plan.bpm);
    w.kv("duration", plan.duration);
    w.key("boundaries");
    w.begin_array();
    for (double b : plan.boundaries) {
        w.value(b);
    }
    w.end_array();
    w.key("segments");
    w.begin_array();
    for (const Segment& s : plan.segments) {
        w.begin_array();
        w.value(s.start);
        w.value(s.end);
        w.end_array();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

inline std::string latents_to_json(const Latents& z) {
    JsonWriter w;
    w.begin_object();
    w.kv("L", z.frames);
    w.kv("D", z.dim);
    w.key("values");
    w.begin_array();
    for (float v : z.data) {
        w.value(static_cast<double>(v));
    }
    w.end_array();
    w.end_object();
    return w.str();
}

inline Latents latents_from_json(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        Latents z(j.at("L").get<std::size_t>(), j.at("D").get<std::size_t>());
        const auto& values = j.at("values");
        if (values.size() != z.data.size()) {
            throw io_error("latent JSON value count does not match L*D");
        }
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            z.data[i] = values.at(i).get<float>();
        }
        return z;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed latents JSON: ") + e.what());
    }
}

/// Parses one camera pose per JSON line:
/// {"fx","fy","cx","cy","R":[9 row-major],"t":[3],"H","W"}.
/// Malformed rows raise io_error, invalid rotations std::invalid_argument,
/// both tagged with the 1-based line number.
inline std::vector<CameraPose> parse_trajectory_jsonl(std::istream& is) {
    std::vector<CameraPose> traj;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        CameraPose pose;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            pose.intrinsics.fx = j.at("fx").get<double>();
            pose.intrinsics.fy = j.at("fy").get<double>();
            pose.intrinsics.cx = j.at("cx").get<double>();
            pose.intrinsics.cy = j.at("cy").get<double>();
            const auto& r = j.at("R");
            const auto& t = j.at("t");
            if (r.size() != 9 || t.size() != 3) {
                throw io_error("R must have 9 entries and t 3 at line " +
                               std::to_string(lineno));
            }
            for (int row = 0; row < 3; ++row) {
                for (int col = 0; col < 3; ++col) {
                    pose.extrinsics.rotation(row, col) =
                        r.at(static_cast<std::size_t>(3 * row + col))
                            .get<double>();
                }
                pose.extrinsics.translation(row) =
                    t.at(static_cast<std::size_t>(row)).get<double>();
            }
            pose.height = j.at("H").get<std::int64_t>();
            pose.width = j.at("W").get<std::int64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw io_error("malformed pose at line " +
                           std::to_string(lineno) + ": " + e.what());
        }
        if (!is_rotation(pose.extrinsics.rotation)) {
            throw std::invalid_argument("invalid rotation at line " +
                                        std::to_string(lineno));
        }
        if (pose.height < 1 || pose.width < 1 || pose.intrinsics.fx <= 0.0 ||
            pose.intrinsics.fy <= 0.0) {
            throw std::invalid_argument("invalid pose fields at line " +
                                        std::to_string(lineno));
        }
        traj.push_back(pose);
    }
    if (traj.empty()) {
        throw io_error("trajectory file contains no poses");
    }
    return traj;
}

inline std::vector<CameraPose> parse_trajectory_jsonl(
    const std::string& path) {
    auto f = detail::open_in(path);
    return parse_trajectory_jsonl(f);
}

/// Parses a JSON array of {"sync_c","hand_reward","video_reward"}.
inline std::vector<ClipScores> parse_clip_scores(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        std::vector<ClipScores> scores;
        for (const auto& item : j) {
            scores.push_back({item.at("sync_c").get<double>(),
                              item.at("hand_reward").get<double>(),
                              item.at("video_reward").get<double>()});
        }
        return scores;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed scores JSON: ") + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    auto f = detail::open_in(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& text) {
    auto f = detail::open_out(path);
    f << text;
    if (!f) {
        throw io_error("failed writing: " + path);
    }
}

}  // namespace clipflow
