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
#include <stdexcept>
#include <string>
#include <vector>

#include "clipflow/rng.hpp"

namespace clipflow {

/// Dense frame-major matrix of latent frames: `frames` rows of `dim`
/// float32 values. Row i is the latent embedding of video frame i.
struct Latents {
    std::size_t frames = 0;
    std::size_t dim = 0;
    std::vector<float> data;  // data[f * dim + d]

    Latents() = default;
    Latents(std::size_t frames_, std::size_t dim_, float fill = 0.0f)
        : frames(frames_), dim(dim_), data(frames_ * dim_, fill) {}

    float& at(std::size_t f, std::size_t d) { return data[f * dim + d]; }
    float at(std::size_t f, std::size_t d) const { return data[f * dim + d]; }

    bool same_shape(const Latents& o) const {
        return frames == o.frames && dim == o.dim;
    }

    bool all_finite() const {
        for (float v : data) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    /// Copy of rows [start, end).
    Latents slice_rows(std::size_t start, std::size_t end) const {
        if (start > end || end > frames) {
            throw std::invalid_argument("Latents::slice_rows: range [" +
                                        std::to_string(start) + ", " +
                                        std::to_string(end) + ") out of " +
                                        std::to_string(frames) + " frames");
        }
        Latents out(end - start, dim);
        std::copy(data.begin() + static_cast<std::ptrdiff_t>(start * dim),
                  data.begin() + static_cast<std::ptrdiff_t>(end * dim),
                  out.data.begin());
        return out;
    }

    bool operator==(const Latents&) const = default;
};

inline void require_same_shape(const Latents& a, const Latents& b,
                               const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.frames) + "x" +
                                    std::to_string(a.dim) + " vs " +
                                    std::to_string(b.frames) + "x" +
                                    std::to_string(b.dim) + ")");
    }
}

/// Largest absolute elementwise difference.
inline double max_abs_diff(const Latents& a, const Latents& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    }
    return m;
}

/// Seeded standard-normal latent matrix.
inline Latents random_latents(std::size_t frames, std::size_t dim,
                              std::mt19937_64& gen) {
    Latents z(frames, dim);
    for (auto& v : z.data) {
        v = static_cast<float>(gaussian(gen));
    }
    return z;
}

}  // namespace clipflow
