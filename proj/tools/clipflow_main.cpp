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
//
// clipflow command line: deterministic front end over the scheduling,
// denoising, camera, segmentation and preference modules. Every command
// writes byte-stable artifacts for a fixed seed and flag set; exit codes
// are 0 on success, 1 for invariant/validation failures and 2 for I/O or
// parse failures.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "clipflow/adapter.hpp"
#include "clipflow/camera.hpp"
#include "clipflow/denoiser.hpp"
#include "clipflow/dpo.hpp"
#include "clipflow/io.hpp"
#include "clipflow/latents.hpp"
#include "clipflow/schedule.hpp"
#include "clipflow/segment.hpp"
#include "clipflow/wav.hpp"

namespace fs = std::filesystem;
using namespace clipflow;

namespace {

struct AppConfig {
    SchedulerParams scheduler{100, 40, 10, 5, 10, 20, 32};
    FusionPolicy fusion = FusionPolicy::kBlend;
    AdapterConfig adapter;
    std::size_t seg_frame_len = 1024;
    std::size_t seg_hop = 256;
    double seg_min_gap_bars = 0.5;
    double seg_avg_tolerance = 0.25;
    ScoreWeights weights;
    std::size_t demo_dim = 16;
    double pipeline_fps = 16.0;
    frame_t pipeline_steps = 8;
    std::size_t pipeline_dim = 8;
    bool ray_add_translation = false;
};

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool check = false;
    bool timings = false;
};

FusionPolicy parse_fusion(const std::string& name) {
    if (name == "blend") {
        return FusionPolicy::kBlend;
    }
    if (name == "overwrite") {
        return FusionPolicy::kOverwrite;
    }
    throw std::invalid_argument("unknown fusion policy: " + name);
}

const char* fusion_name(FusionPolicy f) {
    return f == FusionPolicy::kBlend ? "blend" : "overwrite";
}

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    if (path.empty()) {
        return cfg;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed config JSON: " + std::string(e.what()));
    }
    try {
        if (j.contains("scheduler")) {
            const auto& s = j["scheduler"];
            cfg.scheduler.total_len =
                s.value("l", cfg.scheduler.total_len);
            cfg.scheduler.window = s.value("f", cfg.scheduler.window);
            cfg.scheduler.overlap = s.value("o", cfg.scheduler.overlap);
            cfg.scheduler.shift_step =
                s.value("p", cfg.scheduler.shift_step);
            cfg.scheduler.max_offset =
                s.value("m", cfg.scheduler.max_offset);
            cfg.scheduler.min_clip = s.value("n", cfg.scheduler.min_clip);
            cfg.scheduler.num_steps =
                s.value("T", cfg.scheduler.num_steps);
        }
        if (j.contains("fusion")) {
            cfg.fusion = parse_fusion(j["fusion"].get<std::string>());
        }
        if (j.contains("adapter")) {
            const auto& a = j["adapter"];
            cfg.adapter.block_factor =
                a.value("r", cfg.adapter.block_factor);
            cfg.adapter.residual_blocks =
                a.value("res_blocks", cfg.adapter.residual_blocks);
            cfg.adapter.seed = a.value("seed", cfg.adapter.seed);
            cfg.adapter.init_scale =
                a.value("init_scale", cfg.adapter.init_scale);
            if (a.contains("convs")) {
                cfg.adapter.convs.clear();
                for (const auto& c : a["convs"]) {
                    AdapterConfig::ConvSpec spec;
                    spec.out_channels = c.at("out").get<std::int64_t>();
                    spec.kernel = c.value("k", spec.kernel);
                    spec.stride = c.value("s", spec.stride);
                    spec.pad = c.value("p", spec.pad);
                    cfg.adapter.convs.push_back(spec);
                }
            }
        }
        if (j.contains("segmentation")) {
            const auto& s = j["segmentation"];
            cfg.seg_frame_len = s.value("frame_len", cfg.seg_frame_len);
            cfg.seg_hop = s.value("hop", cfg.seg_hop);
            cfg.seg_min_gap_bars =
                s.value("min_gap_bars", cfg.seg_min_gap_bars);
            cfg.seg_avg_tolerance =
                s.value("avg_tolerance", cfg.seg_avg_tolerance);
        }
        if (j.contains("weights")) {
            const auto& w = j["weights"];
            cfg.weights.w_sync = w.value("sync", cfg.weights.w_sync);
            cfg.weights.w_hand = w.value("hand", cfg.weights.w_hand);
            cfg.weights.w_video = w.value("video", cfg.weights.w_video);
        }
        if (j.contains("demo")) {
            cfg.demo_dim = j["demo"].value("dim", cfg.demo_dim);
        }
        if (j.contains("pipeline")) {
            const auto& p = j["pipeline"];
            cfg.pipeline_fps = p.value("fps", cfg.pipeline_fps);
            cfg.pipeline_steps = p.value("steps", cfg.pipeline_steps);
            cfg.pipeline_dim = p.value("dim", cfg.pipeline_dim);
        }
        cfg.ray_add_translation =
            j.value("ray_add_translation", cfg.ray_add_translation);
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad config field: " + std::string(e.what()));
    }
    return cfg;
}

fs::path prepare_out_dir(const GlobalOpts& g) {
    fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw io_error("cannot create output directory: " + g.out_dir);
    }
    return dir;
}

class StageTimer {
public:
    void start(const std::string& name) {
        name_ = name;
        begin_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto end = std::chrono::steady_clock::now();
        stages_.emplace_back(
            name_, std::chrono::duration<double, std::milli>(end - begin_)
                       .count());
    }
    void emit(JsonWriter& w) const {
        w.key("timings_ms");
        w.begin_object();
        for (const auto& [name, ms] : stages_) {
            w.kv(name, ms);
        }
        w.end_object();
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point begin_;
    std::vector<std::pair<std::string, double>> stages_;
};

struct DemoMetrics {
    double seam = 0.0;
    double max_abs_dev_vs_monolithic = 0.0;
    double max_rel_error_vs_target = 0.0;
    std::size_t total_clips = 0;
    frame_t total_overlap_frames = 0;
};

double max_relative_frame_error(const Latents& got, const Latents& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.frames; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t d = 0; d < got.dim; ++d) {
            const double diff =
                static_cast<double>(got.at(i, d)) - want.at(i, d);
            num += diff * diff;
            den += static_cast<double>(want.at(i, d)) * want.at(i, d);
        }
        worst = std::max(worst,
                         std::sqrt(num) / std::max(1e-30, std::sqrt(den)));
    }
    return worst;
}

/// Oracle-model denoising demo over one schedule; shared by `demo` and
/// `pipeline`.
DemoMetrics run_demo(const DenoiseSchedule& schedule, std::size_t dim,
                     std::uint64_t seed, FusionPolicy fusion,
                     Latents* final_out) {
    const auto frames =
        static_cast<std::size_t>(schedule.params.total_len);
    std::mt19937_64 gen(seed);
    const Latents target = random_latents(frames, dim, gen);
    const Latents z_init = random_latents(frames, dim, gen);
    const VelocityModel model = oracle_point_velocity(target);

    const Latents windowed =
        run_windowed(model, schedule, z_init, ConditionSet{}, fusion);
    const Latents monolithic =
        run_monolithic(model, schedule.params.num_steps, z_init,
                       ConditionSet{});

    DemoMetrics m;
    m.seam = frames >= 2 ? seam_discontinuity(windowed) : 0.0;
    m.max_abs_dev_vs_monolithic = max_abs_diff(windowed, monolithic);
    m.max_rel_error_vs_target =
        max_relative_frame_error(windowed, target);
    for (const TimestepPlan& plan : schedule.plans) {
        m.total_clips += plan.clips.size();
        for (std::size_t i = 1; i < plan.clips.size(); ++i) {
            m.total_overlap_frames +=
                plan.clips[i - 1].end - plan.clips[i].start;
        }
    }
    if (final_out) {
        *final_out = windowed;
    }
    return m;
}

void emit_params(JsonWriter& w, const SchedulerParams& p) {
    w.key("params");
    w.begin_object();
    w.kv("l", p.total_len);
    w.kv("f", p.window);
    w.kv("o", p.overlap);
    w.kv("p", p.shift_step);
    w.kv("m", p.max_offset);
    w.kv("n", p.min_clip);
    w.kv("T", p.num_steps);
    w.end_object();
}

void emit_demo_metrics(JsonWriter& w, const DemoMetrics& m) {
    w.kv("seam_discontinuity", m.seam);
    w.kv("max_abs_deviation_vs_monolithic", m.max_abs_dev_vs_monolithic);
    w.kv("max_rel_error_vs_target", m.max_rel_error_vs_target);
}

// --- subcommands -----------------------------------------------------------

int cmd_plan(const AppConfig& cfg, const GlobalOpts& g,
             const std::string& output_name) {
    const auto errs = validate_params(cfg.scheduler);
    if (!errs.empty()) {
        for (const auto& e : errs) {
            std::cerr << "invalid scheduler params: " << e << "\n";
        }
        return 1;
    }
    const DenoiseSchedule schedule = build_schedule(cfg.scheduler);
    if (g.check) {
        const auto bad = check_schedule(schedule);
        if (!bad.empty()) {
            for (const auto& e : bad) {
                std::cerr << "schedule check failed: " << e << "\n";
            }
            return 1;
        }
        std::size_t clips = 0;
        for (const auto& plan : schedule.plans) {
            clips += plan.clips.size();
        }
        std::cout << "check ok: coverage and overlap invariants hold over "
                  << schedule.plans.size() << " timesteps, " << clips
                  << " clips\n";
    }
    const fs::path out = prepare_out_dir(g) / output_name;
    write_text_file(out.string(), schedule_to_json(schedule));
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_segment(const AppConfig& cfg, const GlobalOpts& g,
                const std::string& wav_path, double bpm) {
    const AudioBuffer audio = read_wav(wav_path);
    const OnsetEnvelope env =
        onset_strength(audio, cfg.seg_frame_len, cfg.seg_hop);
    const SegmentPlan plan =
        segment_music(env, bpm, audio.duration(), cfg.seg_min_gap_bars);
    if (g.check) {
        const auto bad =
            check_segment_plan(plan, env, cfg.seg_avg_tolerance);
        if (!bad.empty()) {
            for (const auto& e : bad) {
                std::cerr << "segment check failed: " << e << "\n";
            }
            return 1;
        }
        std::cout << "check ok: " << plan.boundaries.size()
                  << " boundaries on onset maxima, "
                  << plan.segments.size() << " segments\n";
    }
    const fs::path out = prepare_out_dir(g) / "segments.json";
    write_text_file(out.string(), segment_plan_to_json(plan));
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_demo(const AppConfig& cfg, const GlobalOpts& g) {
    require_valid(cfg.scheduler);
    StageTimer timer;
    timer.start("schedule");
    const DenoiseSchedule schedule = build_schedule(cfg.scheduler);
    timer.stop();

    timer.start("denoise");
    Latents final_latents;
    const DemoMetrics metrics = run_demo(schedule, cfg.demo_dim, g.seed,
                                         cfg.fusion, &final_latents);
    timer.stop();

    const fs::path dir = prepare_out_dir(g);
    timer.start("write");
    write_latents((dir / "latents.bin").string(), final_latents);

    JsonWriter w;
    w.begin_object();
    emit_params(w, cfg.scheduler);
    w.kv("seed", g.seed);
    w.kv("dim", cfg.demo_dim);
    w.kv("fusion", fusion_name(cfg.fusion));
    emit_demo_metrics(w, metrics);
    w.key("schedule");
    w.begin_object();
    w.kv("timesteps", schedule.plans.size());
    w.kv("total_clips", metrics.total_clips);
    w.kv("total_overlap_frames", metrics.total_overlap_frames);
    w.end_object();
    timer.stop();
    if (g.timings) {
        timer.emit(w);
    }
    w.end_object();
    write_text_file((dir / "demo_report.json").string(), w.str());
    std::cout << "wrote " << (dir / "latents.bin").string() << "\n";
    std::cout << "wrote " << (dir / "demo_report.json").string() << "\n";
    return 0;
}

int cmd_camera(const AppConfig& cfg, const GlobalOpts& g,
               const std::string& traj_path, frame_t latent_frames,
               std::int64_t latent_dim) {
    const std::vector<CameraPose> traj = parse_trajectory_jsonl(traj_path);
    const PlueckerMap map =
        trajectory_embedding(traj, cfg.ray_add_translation);

    const std::size_t target_frames =
        latent_frames > 0 ? static_cast<std::size_t>(latent_frames)
                          : map.frames;
    const std::size_t target_dim =
        latent_dim > 0
            ? static_cast<std::size_t>(latent_dim)
            : adapter_output_dim(cfg.adapter, map.height, map.width);
    const Latents embedding =
        camera_adapter(map, cfg.adapter, target_frames, target_dim);

    if (g.check) {
        for (std::size_t l = 0; l < traj.size(); ++l) {
            for (std::int64_t y = 0; y < traj[l].height; ++y) {
                for (std::int64_t x = 0; x < traj[l].width; ++x) {
                    const auto p = plucker_pixel(
                        traj[l], static_cast<double>(x),
                        static_cast<double>(y), cfg.ray_add_translation);
                    const Eigen::Vector3d moment = p.head<3>();
                    const Eigen::Vector3d dir = p.tail<3>();
                    if (std::abs(dir.norm() - 1.0) > 1e-6 ||
                        std::abs(moment.dot(dir)) > 1e-6) {
                        std::cerr << "camera check failed: ray invariants "
                                     "violated at frame "
                                  << l << " pixel (" << x << ", " << y
                                  << ")\n";
                        return 1;
                    }
                }
            }
        }
        if (!embedding.all_finite()) {
            std::cerr << "camera check failed: non-finite embedding\n";
            return 1;
        }
        std::cout << "check ok: unit directions and moment orthogonality "
                     "hold over "
                  << map.frames << " frames\n";
    }

    const fs::path dir = prepare_out_dir(g);
    write_plucker((dir / "plucker.bin").string(), map);
    write_latents((dir / "camera_embedding.bin").string(), embedding);
    std::cout << "wrote " << (dir / "plucker.bin").string() << "\n";
    std::cout << "wrote " << (dir / "camera_embedding.bin").string()
              << "\n";
    return 0;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw io_error("velocity matrices must be arrays of row arrays");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw io_error("ragged velocity matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

int cmd_dpo(const AppConfig& cfg, const GlobalOpts& g,
            const std::string& scores_path, const std::string& losses_path) {
    const std::vector<ClipScores> candidates =
        parse_clip_scores(read_text_file(scores_path));
    const PreferencePair pair = select_pair(candidates, cfg.weights);

    JsonWriter w;
    w.begin_object();
    w.kv("winner", pair.winner);
    w.kv("loser", pair.loser);
    w.key("composites");
    w.begin_array();
    for (const ClipScores& s : candidates) {
        w.value(composite_score(s, cfg.weights));
    }
    w.end_array();

    if (!losses_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(losses_path));
        } catch (const nlohmann::json::exception& e) {
            throw io_error("malformed losses JSON: " +
                           std::string(e.what()));
        }
        try {
            if (j.contains("dpo")) {
                const auto& d = j["dpo"];
                w.kv("dpo_loss",
                     dpo_loss(d.at("logp_w_policy").get<double>(),
                              d.at("logp_w_ref").get<double>(),
                              d.at("logp_l_policy").get<double>(),
                              d.at("logp_l_ref").get<double>(),
                              d.value("beta", 1.0)));
            }
            if (j.contains("flow_dpo")) {
                const auto& d = j["flow_dpo"];
                FlowDpoInputs in;
                in.v_true_w = matrix_from_json(d.at("v_true_w"));
                in.v_pred_w = matrix_from_json(d.at("v_pred_w"));
                in.v_ref_w = matrix_from_json(d.at("v_ref_w"));
                in.v_true_l = matrix_from_json(d.at("v_true_l"));
                in.v_pred_l = matrix_from_json(d.at("v_pred_l"));
                in.v_ref_l = matrix_from_json(d.at("v_ref_l"));
                in.beta_t = d.value("beta_t", 1.0);
                w.kv("flow_dpo_loss", flow_dpo_loss(in));
            }
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad losses field: " + std::string(e.what()));
        }
    }
    w.end_object();

    const fs::path out = prepare_out_dir(g) / "dpo_report.json";
    write_text_file(out.string(), w.str());
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_pipeline(const AppConfig& cfg, const GlobalOpts& g,
                 const std::string& wav_path, double bpm,
                 bool save_latents) {
    const AudioBuffer audio = read_wav(wav_path);
    const OnsetEnvelope env =
        onset_strength(audio, cfg.seg_frame_len, cfg.seg_hop);
    const SegmentPlan plan =
        segment_music(env, bpm, audio.duration(), cfg.seg_min_gap_bars);

    const fs::path dir = prepare_out_dir(g);
    write_text_file((dir / "segments.json").string(),
                    segment_plan_to_json(plan));

    JsonWriter w;
    w.begin_object();
    w.kv("bpm", plan.bpm);
    w.kv("duration", plan.duration);
    w.kv("fps", cfg.pipeline_fps);
    w.kv("seed", g.seed);
    w.key("segments");
    w.begin_array();
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        const Segment& seg = plan.segments[i];
        SchedulerParams params = cfg.scheduler;
        params.total_len = std::max<frame_t>(
            1, std::llround((seg.end - seg.start) * cfg.pipeline_fps));
        params.num_steps = cfg.pipeline_steps;
        const DenoiseSchedule schedule = build_schedule(params);

        char name[64];
        std::snprintf(name, sizeof(name), "schedule_%03zu.json", i);
        write_text_file((dir / name).string(), schedule_to_json(schedule));

        Latents final_latents;
        const DemoMetrics metrics =
            run_demo(schedule, cfg.pipeline_dim,
                     g.seed + static_cast<std::uint64_t>(i), cfg.fusion,
                     save_latents ? &final_latents : nullptr);
        if (save_latents) {
            std::snprintf(name, sizeof(name), "latents_%03zu.bin", i);
            write_latents((dir / name).string(), final_latents);
        }

        w.begin_object();
        w.kv("index", i);
        w.kv("start", seg.start);
        w.kv("end", seg.end);
        w.kv("frames", params.total_len);
        w.kv("clips_per_timestep",
             schedule.plans.front().clips.size());
        emit_demo_metrics(w, metrics);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    write_text_file((dir / "pipeline_report.json").string(), w.str());
    std::cout << "wrote " << (dir / "segments.json").string() << "\n";
    std::cout << "wrote " << (dir / "pipeline_report.json").string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic music-to-video planning and denoising "
                 "toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path,
                   "JSON config file (flags override it)");
    app.add_option("--seed", g.seed, "base RNG seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_flag("--check", g.check,
                 "verify module invariants before writing");
    app.add_flag("--timings", g.timings,
                 "include per-stage timings in reports (non-deterministic)");
    app.fallthrough();

    // plan
    auto* plan = app.add_subcommand("plan", "plan a denoising schedule");
    SchedulerParams flag_params{};
    bool has_params[7] = {};
    std::string plan_output = "schedule.json";
    plan->add_option("--total-len", flag_params.total_len, "frames l")
        ->each([&](const std::string&) { has_params[0] = true; });
    plan->add_option("--window", flag_params.window, "window length f")
        ->each([&](const std::string&) { has_params[1] = true; });
    plan->add_option("--overlap", flag_params.overlap, "overlap o")
        ->each([&](const std::string&) { has_params[2] = true; });
    plan->add_option("--shift-step", flag_params.shift_step,
                     "offset increment p")
        ->each([&](const std::string&) { has_params[3] = true; });
    plan->add_option("--max-offset", flag_params.max_offset,
                     "reset threshold m")
        ->each([&](const std::string&) { has_params[4] = true; });
    plan->add_option("--min-clip", flag_params.min_clip,
                     "minimum clip length n")
        ->each([&](const std::string&) { has_params[5] = true; });
    plan->add_option("--steps", flag_params.num_steps, "timesteps T")
        ->each([&](const std::string&) { has_params[6] = true; });
    plan->add_option("--output", plan_output, "schedule file name");

    // segment
    auto* segment =
        app.add_subcommand("segment", "bar-aligned music segmentation");
    std::string seg_wav;
    double seg_bpm = 0.0;
    segment->add_option("wav", seg_wav, "input WAV (PCM 16-bit)")
        ->required();
    segment->add_option("--bpm", seg_bpm, "tempo in beats per minute")
        ->required();

    // demo
    auto* demo = app.add_subcommand(
        "demo", "synthetic windowed-denoising run with the oracle model");
    frame_t demo_steps = 0;
    std::size_t demo_dim = 0;
    std::string demo_fusion;
    demo->add_option("--steps", demo_steps, "timesteps T");
    demo->add_option("--dim", demo_dim, "latent dimension");
    demo->add_option("--fusion", demo_fusion, "blend | overwrite");

    // camera
    auto* camera = app.add_subcommand(
        "camera", "Plücker embeddings and the adapter projection");
    std::string traj_path;
    frame_t cam_frames = 0;
    std::int64_t cam_dim = 0;
    bool cam_add_translation = false;
    camera->add_option("trajectory", traj_path, "camera trajectory JSONL")
        ->required();
    camera->add_option("--latent-frames", cam_frames,
                       "target latent frame count (default: input length)");
    camera->add_option("--latent-dim", cam_dim,
                       "target latent dimension (default: adapter output)");
    camera->add_flag("--ray-add-translation", cam_add_translation,
                     "add the camera translation to ray directions");

    // dpo
    auto* dpo = app.add_subcommand(
        "dpo", "preference-pair selection and preference losses");
    std::string scores_path;
    std::string losses_path;
    std::vector<double> weight_flags;
    dpo->add_option("scores", scores_path, "candidate scores JSON")
        ->required();
    dpo->add_option("--losses", losses_path,
                    "optional loss inputs JSON (dpo / flow_dpo)");
    dpo->add_option("--weights", weight_flags,
                    "sync, hand, video score weights")
        ->expected(3);

    // pipeline
    auto* pipeline = app.add_subcommand(
        "pipeline", "segment audio, then plan and demo every segment");
    std::string pipe_wav;
    double pipe_bpm = 0.0;
    bool pipe_save_latents = false;
    pipeline->add_option("wav", pipe_wav, "input WAV (PCM 16-bit)")
        ->required();
    pipeline->add_option("--bpm", pipe_bpm, "tempo in beats per minute")
        ->required();
    pipeline->add_flag("--save-latents", pipe_save_latents,
                       "write per-segment latent binaries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        AppConfig cfg = load_config(g.config_path);
        if (app.got_subcommand(plan)) {
            if (has_params[0]) cfg.scheduler.total_len = flag_params.total_len;
            if (has_params[1]) cfg.scheduler.window = flag_params.window;
            if (has_params[2]) cfg.scheduler.overlap = flag_params.overlap;
            if (has_params[3])
                cfg.scheduler.shift_step = flag_params.shift_step;
            if (has_params[4])
                cfg.scheduler.max_offset = flag_params.max_offset;
            if (has_params[5]) cfg.scheduler.min_clip = flag_params.min_clip;
            if (has_params[6]) cfg.scheduler.num_steps = flag_params.num_steps;
            return cmd_plan(cfg, g, plan_output);
        }
        if (app.got_subcommand(segment)) {
            return cmd_segment(cfg, g, seg_wav, seg_bpm);
        }
        if (app.got_subcommand(demo)) {
            if (demo_steps > 0) {
                cfg.scheduler.num_steps = demo_steps;
            }
            if (demo_dim > 0) {
                cfg.demo_dim = demo_dim;
            }
            if (!demo_fusion.empty()) {
                cfg.fusion = parse_fusion(demo_fusion);
            }
            return cmd_demo(cfg, g);
        }
        if (app.got_subcommand(camera)) {
            if (cam_add_translation) {
                cfg.ray_add_translation = true;
            }
            return cmd_camera(cfg, g, traj_path, cam_frames, cam_dim);
        }
        if (app.got_subcommand(dpo)) {
            if (!weight_flags.empty()) {
                cfg.weights = {weight_flags[0], weight_flags[1],
                               weight_flags[2]};
            }
            return cmd_dpo(cfg, g, scores_path, losses_path);
        }
        if (app.got_subcommand(pipeline)) {
            return cmd_pipeline(cfg, g, pipe_wav, pipe_bpm,
                                pipe_save_latents);
        }
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
