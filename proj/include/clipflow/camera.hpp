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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "clipflow/tensor.hpp"

namespace clipflow {

struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
};

/// World-to-camera extrinsics: x_cam = R * x_world + t.
struct Extrinsics {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct CameraPose {
    Intrinsics intrinsics;
    Extrinsics extrinsics;
    std::int64_t height = 1;
    std::int64_t width = 1;
};

/// Per-pixel ray embeddings for a trajectory of L frames: channels 0-2 hold
/// the moment o x d', channels 3-5 the unit ray direction d'.
struct PlueckerMap {
    std::size_t frames = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;  // data[((l * 6 + c) * height + y) * width + x]

    PlueckerMap() = default;
    PlueckerMap(std::size_t l, std::size_t h, std::size_t w)
        : frames(l), height(h), width(w), data(l * 6 * h * w, 0.0f) {}

    float& at(std::size_t l, std::size_t c, std::size_t y, std::size_t x) {
        return data[((l * 6 + c) * height + y) * width + x];
    }
    float at(std::size_t l, std::size_t c, std::size_t y,
             std::size_t x) const {
        return data[((l * 6 + c) * height + y) * width + x];
    }

    /// Copy of one frame as a 6 x H x W tensor.
    Tensor3 frame(std::size_t l) const {
        Tensor3 out(6, height, width);
        const std::size_t n = 6 * height * width;
        std::copy(data.begin() + static_cast<std::ptrdiff_t>(l * n),
                  data.begin() + static_cast<std::ptrdiff_t>((l + 1) * n),
                  out.data.begin());
        return out;
    }
};

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-6) {
    const Eigen::Matrix3d gram = r.transpose() * r;
    return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <=
               tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

inline void require_rotation(const Eigen::Matrix3d& r) {
    if (!is_rotation(r)) {
        throw std::invalid_argument(
            "extrinsics rotation is not orthonormal with determinant 1");
    }
}

inline void require_pose(const CameraPose& pose) {
    require_rotation(pose.extrinsics.rotation);
    if (pose.intrinsics.fx <= 0.0 || pose.intrinsics.fy <= 0.0) {
        throw std::invalid_argument("focal lengths must be positive");
    }
    if (pose.height < 1 || pose.width < 1) {
        throw std::invalid_argument("image size must be at least 1x1");
    }
}

/// Camera center in world coordinates: o = -R^T t.
inline Eigen::Vector3d camera_center(const Extrinsics& ext) {
    require_rotation(ext.rotation);
    return -(ext.rotation.transpose() * ext.translation);
}

/// Unit ray direction through pixel (u, v). The default is the pure
/// rotated direction d = R K^{-1} [u, v, 1]^T; with `add_translation`
/// the camera translation is added to d before normalizing.
inline Eigen::Vector3d ray_direction(const CameraPose& pose, double u,
                                     double v,
                                     bool add_translation = false) {
    require_pose(pose);
    const Intrinsics& k = pose.intrinsics;
    const Eigen::Vector3d d_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
    Eigen::Vector3d d = pose.extrinsics.rotation * d_cam;
    if (add_translation) {
        d += pose.extrinsics.translation;
    }
    const double norm = d.norm();
    if (norm < 1e-12) {
        throw std::invalid_argument("ray direction has zero length at pixel "
                                    "(" + std::to_string(u) + ", " +
                                    std::to_string(v) + ")");
    }
    return d / norm;
}

/// The 6-vector (o x d', d') of the ray through pixel (u, v).
inline Eigen::Matrix<double, 6, 1> plucker_pixel(
    const CameraPose& pose, double u, double v,
    bool add_translation = false) {
    const Eigen::Vector3d origin = camera_center(pose.extrinsics);
    const Eigen::Vector3d dir = ray_direction(pose, u, v, add_translation);
    Eigen::Matrix<double, 6, 1> p;
    p.head<3>() = origin.cross(dir);
    p.tail<3>() = dir;
    return p;
}

/// Per-pixel Plücker embedding of one pose as a 6 x H x W tensor.
/// Pixels are sampled on the integer grid u = x, v = y, matching
/// ray_direction(pose, x, y).
inline Tensor3 plucker_embedding(const CameraPose& pose,
                                 bool add_translation = false) {
    require_pose(pose);
    const auto h = static_cast<std::size_t>(pose.height);
    const auto w = static_cast<std::size_t>(pose.width);
    Tensor3 out(6, h, w);
    const Eigen::Vector3d origin = camera_center(pose.extrinsics);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const Eigen::Vector3d dir =
                ray_direction(pose, static_cast<double>(x),
                              static_cast<double>(y), add_translation);
            const Eigen::Vector3d moment = origin.cross(dir);
            for (int c = 0; c < 3; ++c) {
                out.at(static_cast<std::size_t>(c), y, x) =
                    static_cast<float>(moment[c]);
                out.at(static_cast<std::size_t>(c + 3), y, x) =
                    static_cast<float>(dir[c]);
            }
        }
    }
    return out;
}

/// Stacks the per-frame embeddings of a trajectory into an L x 6 x H x W
/// map. All poses must share the same resolution.
inline PlueckerMap trajectory_embedding(const std::vector<CameraPose>& traj,
                                        bool add_translation = false) {
    if (traj.empty()) {
        throw std::invalid_argument("trajectory_embedding: empty trajectory");
    }
    const auto h = static_cast<std::size_t>(traj.front().height);
    const auto w = static_cast<std::size_t>(traj.front().width);
    PlueckerMap map(traj.size(), h, w);
    for (std::size_t l = 0; l < traj.size(); ++l) {
        if (static_cast<std::size_t>(traj[l].height) != h ||
            static_cast<std::size_t>(traj[l].width) != w) {
            throw std::invalid_argument(
                "trajectory_embedding: inconsistent resolution at frame " +
                std::to_string(l));
        }
        const Tensor3 frame = plucker_embedding(traj[l], add_translation);
        std::copy(frame.data.begin(), frame.data.end(),
                  map.data.begin() +
                      static_cast<std::ptrdiff_t>(l * frame.size()));
    }
    return map;
}

}  // namespace clipflow
