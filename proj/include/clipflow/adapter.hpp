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

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "clipflow/camera.hpp"
#include "clipflow/latents.hpp"
#include "clipflow/rng.hpp"
#include "clipflow/tensor.hpp"

namespace clipflow {

/// Rearranges r x r spatial blocks into channels:
/// (C, H, W) -> (C * r^2, H / r, W / r). Pure element permutation; block
/// contents flatten row-major into the channel axis.
inline Tensor3 space_to_depth(const Tensor3& x, std::int64_t r) {
    if (r < 1) {
        throw std::invalid_argument("space_to_depth: factor must be >= 1");
    }
    const auto rr = static_cast<std::size_t>(r);
    if (x.height % rr != 0 || x.width % rr != 0) {
        throw std::invalid_argument(
            "space_to_depth: factor " + std::to_string(r) +
            " does not divide " + std::to_string(x.height) + "x" +
            std::to_string(x.width));
    }
    Tensor3 out(x.channels * rr * rr, x.height / rr, x.width / rr);
    for (std::size_t c = 0; c < x.channels; ++c) {
        for (std::size_t y = 0; y < out.height; ++y) {
            for (std::size_t xx = 0; xx < out.width; ++xx) {
                for (std::size_t dy = 0; dy < rr; ++dy) {
                    for (std::size_t dx = 0; dx < rr; ++dx) {
                        out.at(c * rr * rr + dy * rr + dx, y, xx) =
                            x.at(c, y * rr + dy, xx * rr + dx);
                    }
                }
            }
        }
    }
    return out;
}

/// Exact inverse of space_to_depth.
inline Tensor3 depth_to_space(const Tensor3& x, std::int64_t r) {
    if (r < 1) {
        throw std::invalid_argument("depth_to_space: factor must be >= 1");
    }
    const auto rr = static_cast<std::size_t>(r);
    if (x.channels % (rr * rr) != 0) {
        throw std::invalid_argument("depth_to_space: channel count " +
                                    std::to_string(x.channels) +
                                    " not divisible by r^2");
    }
    Tensor3 out(x.channels / (rr * rr), x.height * rr, x.width * rr);
    for (std::size_t c = 0; c < out.channels; ++c) {
        for (std::size_t y = 0; y < x.height; ++y) {
            for (std::size_t xx = 0; xx < x.width; ++xx) {
                for (std::size_t dy = 0; dy < rr; ++dy) {
                    for (std::size_t dx = 0; dx < rr; ++dx) {
                        out.at(c, y * rr + dy, xx * rr + dx) =
                            x.at(c * rr * rr + dy * rr + dx, y, xx);
                    }
                }
            }
        }
    }
    return out;
}

/// Convolution weights, OutC x InC x KH x KW.
struct ConvWeights {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::vector<float> data;

    ConvWeights() = default;
    ConvWeights(std::size_t oc, std::size_t ic, std::size_t kh,
                std::size_t kw, float fill = 0.0f)
        : out_channels(oc),
          in_channels(ic),
          kernel_h(kh),
          kernel_w(kw),
          data(oc * ic * kh * kw, fill) {}

    float& at(std::size_t oc, std::size_t ic, std::size_t ky,
              std::size_t kx) {
        return data[((oc * in_channels + ic) * kernel_h + ky) * kernel_w +
                    kx];
    }
    float at(std::size_t oc, std::size_t ic, std::size_t ky,
             std::size_t kx) const {
        return data[((oc * in_channels + ic) * kernel_h + ky) * kernel_w +
                    kx];
    }
};

/// Standard cross-correlation with zero padding.
inline Tensor3 conv2d(const Tensor3& x, const ConvWeights& w,
                      std::int64_t stride = 1, std::int64_t pad = 0) {
    if (stride < 1 || pad < 0) {
        throw std::invalid_argument("conv2d: stride must be >= 1, pad >= 0");
    }
    if (w.in_channels != x.channels) {
        throw std::invalid_argument(
            "conv2d: kernel expects " + std::to_string(w.in_channels) +
            " input channels, got " + std::to_string(x.channels));
    }
    const auto h = static_cast<std::int64_t>(x.height);
    const auto wd = static_cast<std::int64_t>(x.width);
    const auto kh = static_cast<std::int64_t>(w.kernel_h);
    const auto kw = static_cast<std::int64_t>(w.kernel_w);
    const std::int64_t out_h = (h + 2 * pad - kh) / stride + 1;
    const std::int64_t out_w = (wd + 2 * pad - kw) / stride + 1;
    if (h + 2 * pad < kh || wd + 2 * pad < kw || out_h < 1 || out_w < 1) {
        throw std::invalid_argument("conv2d: kernel larger than padded "
                                    "input");
    }
    Tensor3 out(w.out_channels, static_cast<std::size_t>(out_h),
                static_cast<std::size_t>(out_w));
    for (std::size_t oc = 0; oc < w.out_channels; ++oc) {
        for (std::int64_t oy = 0; oy < out_h; ++oy) {
            for (std::int64_t ox = 0; ox < out_w; ++ox) {
                double acc = 0.0;
                for (std::size_t ic = 0; ic < x.channels; ++ic) {
                    for (std::int64_t ky = 0; ky < kh; ++ky) {
                        const std::int64_t iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) {
                            continue;
                        }
                        for (std::int64_t kx = 0; kx < kw; ++kx) {
                            const std::int64_t ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= wd) {
                                continue;
                            }
                            acc += static_cast<double>(
                                       x.at(ic, static_cast<std::size_t>(iy),
                                            static_cast<std::size_t>(ix))) *
                                   w.at(oc, ic, static_cast<std::size_t>(ky),
                                        static_cast<std::size_t>(kx));
                        }
                    }
                }
                out.at(oc, static_cast<std::size_t>(oy),
                       static_cast<std::size_t>(ox)) =
                    static_cast<float>(acc);
            }
        }
    }
    return out;
}

inline Tensor3 add_channel_bias(Tensor3 x, const std::vector<float>& bias) {
    if (bias.size() != x.channels) {
        throw std::invalid_argument("bias size does not match channels");
    }
    for (std::size_t c = 0; c < x.channels; ++c) {
        for (std::size_t y = 0; y < x.height; ++y) {
            for (std::size_t xx = 0; xx < x.width; ++xx) {
                x.at(c, y, xx) += bias[c];
            }
        }
    }
    return x;
}

inline Tensor3 relu(Tensor3 x) {
    for (float& v : x.data) {
        v = v > 0.0f ? v : 0.0f;
    }
    return x;
}

/// Shape-preserving residual block: x + conv2(relu(conv1(x) + b1)) + b2.
/// Both convolutions use stride 1 and same-padding, so kernels must be odd.
struct ResidualBlockParams {
    ConvWeights conv1;
    std::vector<float> bias1;
    ConvWeights conv2;
    std::vector<float> bias2;
};

inline Tensor3 residual_block(const Tensor3& x,
                              const ResidualBlockParams& params) {
    const auto pad1 = static_cast<std::int64_t>(params.conv1.kernel_h / 2);
    const auto pad2 = static_cast<std::int64_t>(params.conv2.kernel_h / 2);
    Tensor3 f = relu(add_channel_bias(conv2d(x, params.conv1, 1, pad1),
                                      params.bias1));
    f = add_channel_bias(conv2d(f, params.conv2, 1, pad2), params.bias2);
    if (!f.same_shape(x)) {
        throw std::invalid_argument(
            "residual_block: inner stack changed the tensor shape");
    }
    Tensor3 out = x;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] += f.data[i];
    }
    return out;
}

/// Configuration of the camera-embedding projection stack:
/// space_to_depth -> strided convolutions -> residual blocks, applied per
/// frame, then flattened to the latent dimension. Parameters are drawn
/// deterministically from `seed`.
struct AdapterConfig {
    struct ConvSpec {
        std::int64_t out_channels = 0;
        std::int64_t kernel = 3;
        std::int64_t stride = 1;
        std::int64_t pad = 1;
    };

    std::int64_t block_factor = 2;  // space_to_depth factor r
    std::vector<ConvSpec> convs = {{8, 3, 1, 1}, {4, 3, 2, 1}};
    std::int64_t residual_blocks = 2;
    std::uint64_t seed = 1234;
    double init_scale = 0.05;
};

/// Output shape of the per-frame stack for a 6 x H x W input, before
/// flattening. Throws when any stage is infeasible.
inline Tensor3 adapter_stack_shape(const AdapterConfig& cfg, std::size_t h,
                                   std::size_t w) {
    if (cfg.block_factor < 1 ||
        h % static_cast<std::size_t>(cfg.block_factor) != 0 ||
        w % static_cast<std::size_t>(cfg.block_factor) != 0) {
        throw std::invalid_argument(
            "adapter: space_to_depth factor does not divide the input");
    }
    const auto r = static_cast<std::size_t>(cfg.block_factor);
    std::size_t c = 6 * r * r;
    std::size_t ch = h / r;
    std::size_t cw = w / r;
    for (const auto& spec : cfg.convs) {
        if (spec.out_channels < 1 || spec.kernel < 1 || spec.stride < 1 ||
            spec.pad < 0) {
            throw std::invalid_argument("adapter: invalid conv spec");
        }
        const std::int64_t oh = (static_cast<std::int64_t>(ch) +
                                 2 * spec.pad - spec.kernel) /
                                    spec.stride +
                                1;
        const std::int64_t ow = (static_cast<std::int64_t>(cw) +
                                 2 * spec.pad - spec.kernel) /
                                    spec.stride +
                                1;
        if (oh < 1 || ow < 1) {
            throw std::invalid_argument(
                "adapter: conv collapses the spatial grid");
        }
        c = static_cast<std::size_t>(spec.out_channels);
        ch = static_cast<std::size_t>(oh);
        cw = static_cast<std::size_t>(ow);
    }
    return Tensor3(c, ch, cw);
}

/// Flattened per-frame embedding width produced by the stack.
inline std::size_t adapter_output_dim(const AdapterConfig& cfg,
                                      std::size_t h, std::size_t w) {
    return adapter_stack_shape(cfg, h, w).size();
}

struct AdapterParams {
    std::vector<ConvWeights> conv_weights;
    std::vector<std::vector<float>> conv_biases;
    std::vector<ResidualBlockParams> res_blocks;
};

/// Deterministic parameter draw: gaussian weights scaled by
/// init_scale / sqrt(fan_in), zero biases.
inline AdapterParams init_adapter_params(const AdapterConfig& cfg,
                                         std::size_t h, std::size_t w) {
    adapter_stack_shape(cfg, h, w);  // validate feasibility
    std::mt19937_64 gen(cfg.seed);
    const auto r = static_cast<std::size_t>(cfg.block_factor);

    auto draw = [&gen](std::size_t oc, std::size_t ic, std::size_t k,
                       double scale) {
        ConvWeights cw(oc, ic, k, k);
        const double s = scale / std::sqrt(static_cast<double>(ic * k * k));
        for (auto& v : cw.data) {
            v = static_cast<float>(gaussian(gen) * s);
        }
        return cw;
    };

    AdapterParams params;
    std::size_t in_c = 6 * r * r;
    for (const auto& spec : cfg.convs) {
        params.conv_weights.push_back(
            draw(static_cast<std::size_t>(spec.out_channels), in_c,
                 static_cast<std::size_t>(spec.kernel), cfg.init_scale));
        params.conv_biases.emplace_back(
            static_cast<std::size_t>(spec.out_channels), 0.0f);
        in_c = static_cast<std::size_t>(spec.out_channels);
    }
    for (std::int64_t b = 0; b < cfg.residual_blocks; ++b) {
        ResidualBlockParams rb;
        rb.conv1 = draw(in_c, in_c, 3, cfg.init_scale);
        rb.bias1.assign(in_c, 0.0f);
        rb.conv2 = draw(in_c, in_c, 3, cfg.init_scale);
        rb.bias2.assign(in_c, 0.0f);
        params.res_blocks.push_back(std::move(rb));
    }
    return params;
}

namespace detail {

inline Tensor3 run_adapter_stack(const Tensor3& frame,
                                 const AdapterConfig& cfg,
                                 const AdapterParams& params) {
    Tensor3 x = space_to_depth(frame, cfg.block_factor);
    for (std::size_t i = 0; i < cfg.convs.size(); ++i) {
        x = relu(add_channel_bias(conv2d(x, params.conv_weights[i],
                                         cfg.convs[i].stride,
                                         cfg.convs[i].pad),
                                  params.conv_biases[i]));
    }
    for (const auto& rb : params.res_blocks) {
        x = residual_block(x, rb);
    }
    return x;
}

}  // namespace detail

/// Projects a Plücker map to the latent tensor shape: the per-frame stack
/// flattens to target_dim and the temporal axis maps L -> target_frames by
/// strided frame grouping (group j spans [j*L/L', (j+1)*L/L'), averaged).
inline Latents camera_adapter(const PlueckerMap& pmap,
                              const AdapterConfig& cfg,
                              std::size_t target_frames,
                              std::size_t target_dim) {
    if (pmap.frames == 0) {
        throw std::invalid_argument("camera_adapter: empty map");
    }
    if (target_frames < 1 || target_frames > pmap.frames) {
        throw std::invalid_argument(
            "camera_adapter: target frame count " +
            std::to_string(target_frames) + " not reachable from " +
            std::to_string(pmap.frames) + " input frames");
    }
    const std::size_t dim = adapter_output_dim(cfg, pmap.height, pmap.width);
    if (dim != target_dim) {
        throw std::invalid_argument(
            "camera_adapter: stack produces dim " + std::to_string(dim) +
            ", target latent dim is " + std::to_string(target_dim));
    }
    const AdapterParams params =
        init_adapter_params(cfg, pmap.height, pmap.width);

    Latents per_frame(pmap.frames, dim);
    for (std::size_t l = 0; l < pmap.frames; ++l) {
        const Tensor3 out = detail::run_adapter_stack(pmap.frame(l), cfg,
                                                      params);
        for (std::size_t i = 0; i < dim; ++i) {
            per_frame.at(l, i) = out.data[i];
        }
    }
    if (target_frames == pmap.frames) {
        return per_frame;
    }
    Latents grouped(target_frames, dim);
    for (std::size_t j = 0; j < target_frames; ++j) {
        const std::size_t lo = j * pmap.frames / target_frames;
        const std::size_t hi = (j + 1) * pmap.frames / target_frames;
        for (std::size_t d = 0; d < dim; ++d) {
            double acc = 0.0;
            for (std::size_t l = lo; l < hi; ++l) {
                acc += per_frame.at(l, d);
            }
            grouped.at(j, d) =
                static_cast<float>(acc / static_cast<double>(hi - lo));
        }
    }
    return grouped;
}

/// Element-wise additive injection of the camera embedding into latents.
inline Latents inject_camera(const Latents& z, const Latents& cam) {
    require_same_shape(z, cam, "inject_camera");
    Latents out = z;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] += cam.data[i];
    }
    return out;
}

}  // namespace clipflow
