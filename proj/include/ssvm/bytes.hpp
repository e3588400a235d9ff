#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "ssvm/error.hpp"

namespace ssvm {

/// Little-endian byte writer for the checkpoint/model payloads.
class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void f64_vec(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }

private:
    std::vector<std::uint8_t>& out_;
};

/// Matching reader; throws CorruptionError on truncation.
class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size, std::size_t& offset)
        : data_(data), size_(size), off_(offset) {}

    std::uint8_t u8() {
        need(1);
        return data_[off_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[off_ + i]) << (8 * i);
        off_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[off_ + i]) << (8 * i);
        off_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(data_ + off_), len);
        off_ += len;
        return s;
    }
    std::vector<double> f64_vec() {
        std::uint64_t len = u64();
        if (len > size_ / 8) throw CorruptionError("vector length exceeds payload");
        std::vector<double> v(len);
        for (auto& x : v) x = f64();
        return v;
    }
    std::size_t offset() const { return off_; }

private:
    void need(std::size_t k) const {
        if (off_ + k > size_) throw CorruptionError("truncated payload");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t& off_;
};

/// CRC-32 (IEEE 802.3) of a byte range.
std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

}  // namespace ssvm
