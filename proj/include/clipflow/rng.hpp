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

#include <cstdint>
#include <random>

namespace clipflow {

// Seeded draws below avoid std::uniform_real_distribution and
// std::normal_distribution on purpose: their output is not specified by the
// standard and differs between library implementations, while mt19937_64 and
// plain arithmetic reproduce bit-identically everywhere. Golden files depend
// on that.

/// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Approximate standard normal via the sum of 12 uniforms (Irwin-Hall).
inline double gaussian(std::mt19937_64& gen) {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) {
        s += uniform01(gen);
    }
    return s - 6.0;
}

}  // namespace clipflow
