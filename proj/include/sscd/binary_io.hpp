#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sscd/error.hpp"

namespace sscd::binary {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return value;
    }
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <typename T>
    void put(T value) {
        value = to_little(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    void put_bytes(std::string_view bytes) { out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); }

    void put_floats(std::span<const float> values) {
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size_bytes()));
        } else {
            for (float v : values) put(v);
        }
    }

private:
    std::ostream& out_;
};

/// Bounds-checked reader that reports the byte offset of any short read.
class Reader {
public:
    Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    template <typename T>
    T get(const char* what) {
        T value{};
        read_raw(reinterpret_cast<char*>(&value), sizeof(T), what);
        return to_little(value);
    }

    std::string get_bytes(std::size_t n, const char* what) {
        std::string s(n, '\0');
        read_raw(s.data(), n, what);
        return s;
    }

    void get_floats(std::span<float> out, const char* what) {
        read_raw(reinterpret_cast<char*>(out.data()), out.size_bytes(), what);
        if constexpr (std::endian::native == std::endian::big) {
            for (float& v : out) v = to_little(v);
        }
    }

    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after last record");
    }

    [[noreturn]] void fail(const std::string& what) const { throw FormatError(source_, offset_, what); }

    [[nodiscard]] std::uint64_t offset() const { return offset_; }

private:
    void read_raw(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            fail(std::string("truncated while reading ") + what);
        }
        offset_ += n;
    }

    std::istream& in_;
    std::string source_;
    std::uint64_t offset_ = 0;
};

}  // namespace sscd::binary
