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
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "clipflow/errors.hpp"
#include "clipflow/segment.hpp"

namespace clipflow {

/// Reads a PCM 16-bit little-endian WAV file. Stereo (or any multichannel)
/// input is downmixed by averaging; samples are scaled to [-1, 1).
inline AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw io_error("cannot open input: " + path);
    }
    auto read_bytes = [&f, &path](char* dst, std::size_t n) {
        if (!f.read(dst, static_cast<std::streamsize>(n))) {
            throw io_error("truncated WAV file: " + path);
        }
    };
    auto read_u32 = [&read_bytes] {
        unsigned char b[4];
        read_bytes(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) |
               static_cast<std::uint32_t>(b[1]) << 8 |
               static_cast<std::uint32_t>(b[2]) << 16 |
               static_cast<std::uint32_t>(b[3]) << 24;
    };
    auto read_u16 = [&read_bytes] {
        unsigned char b[2];
        read_bytes(reinterpret_cast<char*>(b), 2);
        return static_cast<std::uint16_t>(
            static_cast<std::uint16_t>(b[0]) |
            static_cast<std::uint16_t>(b[1]) << 8);
    };

    char tag[4];
    read_bytes(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) {
        throw io_error("not a RIFF file: " + path);
    }
    read_u32();  // RIFF payload size
    read_bytes(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) {
        throw io_error("not a WAVE file: " + path);
    }

    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    std::vector<char> payload;

    while (f.peek() != std::char_traits<char>::eof()) {
        read_bytes(tag, 4);
        const std::uint32_t size = read_u32();
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            const std::uint16_t format = read_u16();
            channels = read_u16();
            sample_rate = read_u32();
            read_u32();  // byte rate
            read_u16();  // block align
            bits = read_u16();
            if (size > 16) {
                f.seekg(size - 16, std::ios::cur);
            }
            if (format != 1) {
                throw io_error("unsupported WAV encoding (PCM only): " +
                               path);
            }
            if (bits != 16) {
                throw io_error("unsupported WAV bit depth (16-bit only): " +
                               path);
            }
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            payload.resize(size);
            read_bytes(payload.data(), size);
        } else {
            f.seekg(size + (size & 1), std::ios::cur);
            if (!f) {
                throw io_error("truncated WAV file: " + path);
            }
        }
    }

    if (!have_fmt || channels == 0 || sample_rate == 0) {
        throw io_error("missing fmt chunk: " + path);
    }
    if (payload.empty()) {
        throw io_error("missing or empty data chunk: " + path);
    }

    const std::size_t frame_bytes = 2u * channels;
    const std::size_t num_frames = payload.size() / frame_bytes;
    AudioBuffer audio;
    audio.sample_rate = static_cast<double>(sample_rate);
    audio.samples.resize(num_frames);
    for (std::size_t i = 0; i < num_frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const auto* b = reinterpret_cast<const unsigned char*>(
                payload.data() + i * frame_bytes + 2 * c);
            const auto raw = static_cast<std::int16_t>(
                static_cast<std::uint16_t>(b[0]) |
                static_cast<std::uint16_t>(b[1]) << 8);
            acc += static_cast<double>(raw);
        }
        audio.samples[i] = acc / (32768.0 * channels);
    }
    return audio;
}

}  // namespace clipflow
