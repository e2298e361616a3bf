// Copyright 2026 The qtlbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <string>
#include <string_view>

#include "qtl/errors.hpp"

namespace qtl::io {

/// Appends fixed-width little-endian values to a byte string.
class ByteWriter {
  public:
    void put_bytes(std::string_view s) { buf_.append(s); }
    void put_u16(std::uint16_t v) { put_int(v); }
    void put_u32(std::uint32_t v) { put_int(v); }
    void put_u64(std::uint64_t v) { put_int(v); }
    void put_f32(float v) { put_int(std::bit_cast<std::uint32_t>(v)); }
    void put_f64(double v) { put_int(std::bit_cast<std::uint64_t>(v)); }

    [[nodiscard]] const std::string &bytes() const { return buf_; }
    std::string take() { return std::move(buf_); }

  private:
    template <typename U>
    void put_int(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
        }
    }
    std::string buf_;
};

/// Reads little-endian values; running off the end throws CorruptionError.
class ByteReader {
  public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::string_view get_bytes(std::size_t n) {
        require(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint16_t get_u16() { return get_int<std::uint16_t>(); }
    std::uint32_t get_u32() { return get_int<std::uint32_t>(); }
    std::uint64_t get_u64() { return get_int<std::uint64_t>(); }
    float get_f32() { return std::bit_cast<float>(get_int<std::uint32_t>()); }
    double get_f64() { return std::bit_cast<double>(get_int<std::uint64_t>()); }

    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] std::size_t position() const { return pos_; }

  private:
    void require(std::size_t n) const {
        if (remaining() < n) {
            throw CorruptionError("truncated payload at byte " + std::to_string(pos_) +
                                  ": need " + std::to_string(n) + ", have " +
                                  std::to_string(remaining()));
        }
    }
    template <typename U>
    U get_int() {
        require(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[pos_ + i]))
                                << (8 * i));
        }
        pos_ += sizeof(U);
        return v;
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string &path);

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::string &path, std::string_view contents);

}  // namespace qtl::io
