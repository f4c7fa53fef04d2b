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
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clipflow {

/// Streaming JSON emitter with stable output bytes: keys appear in call
/// order and every floating-point value is printed with "%.9g" (nine
/// significant digits, enough to round-trip float32 exactly). Emitted
/// documents are compact (no whitespace).
///
/// Command outputs and golden test fixtures are produced through this
/// writer so that repeated runs are byte-identical.
class JsonWriter {
public:
    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(std::string_view k) {
        separate();
        write_string(k);
        out_ += ':';
        after_key_ = true;
    }

    void value(double v) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("JsonWriter: non-finite number");
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        separate();
        out_ += buf;
    }
    void value(std::int64_t v) {
        separate();
        out_ += std::to_string(v);
    }
    void value(std::uint64_t v) {
        separate();
        out_ += std::to_string(v);
    }
    void value(int v) { value(static_cast<std::int64_t>(v)); }
    void value(bool v) {
        separate();
        out_ += v ? "true" : "false";
    }
    void value(std::string_view v) {
        separate();
        write_string(v);
    }
    void value(const char* v) { value(std::string_view(v)); }

    template <typename T>
    void kv(std::string_view k, T v) {
        key(k);
        value(v);
    }

    /// Finished document plus a trailing newline.
    std::string str() const { return out_ + "\n"; }

private:
    void open(char c) {
        separate();
        out_ += c;
        first_.push_back(true);
    }
    void close(char c) {
        if (first_.empty()) {
            throw std::logic_error("JsonWriter: unbalanced close");
        }
        out_ += c;
        first_.pop_back();
    }
    void separate() {
        if (after_key_) {
            after_key_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) {
                out_ += ',';
            }
            first_.back() = false;
        }
    }
    void write_string(std::string_view s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

}  // namespace clipflow
