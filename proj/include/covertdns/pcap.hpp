#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "covertdns/errors.hpp"

namespace covertdns {

// Classic pcap only: magic 0xa1b2c3d4 (either byte order), version 2.4,
// linktype 1 (Ethernet).
inline constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4u;
inline constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1u;
inline constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0au;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;

inline constexpr std::uint8_t kTlsChangeCipherSpec = 20;
inline constexpr std::uint8_t kTlsAlert = 21;
inline constexpr std::uint8_t kTlsHandshake = 22;
inline constexpr std::uint8_t kTlsApplicationData = 23;

// Ethernet(14) + IPv4(20) + TCP(20) + TLS record header(5): the smallest
// frame that can carry one TLS record with a non-empty payload is 60 bytes.
inline constexpr std::uint32_t kFrameOverhead = 54;
inline constexpr std::uint32_t kMinTlsFrame = kFrameOverhead + 5 + 1;

inline std::uint32_t parse_ipv4(const std::string& dotted) {
    std::uint32_t parts[4];
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        if (pos >= dotted.size() || !std::isdigit(static_cast<unsigned char>(dotted[pos])))
            fail(Errc::invalid_config, "bad IPv4 address: " + dotted);
        std::uint32_t v = 0;
        while (pos < dotted.size() && std::isdigit(static_cast<unsigned char>(dotted[pos]))) {
            v = v * 10 + static_cast<std::uint32_t>(dotted[pos] - '0');
            if (v > 255) fail(Errc::invalid_config, "bad IPv4 address: " + dotted);
            ++pos;
        }
        parts[i] = v;
        if (i < 3) {
            if (pos >= dotted.size() || dotted[pos] != '.')
                fail(Errc::invalid_config, "bad IPv4 address: " + dotted);
            ++pos;
        }
    }
    if (pos != dotted.size()) fail(Errc::invalid_config, "bad IPv4 address: " + dotted);
    return (parts[0] << 24) | (parts[1] << 16) | (parts[2] << 8) | parts[3];
}

inline std::string format_ipv4(std::uint32_t ip) {
    return std::to_string((ip >> 24) & 0xff) + '.' + std::to_string((ip >> 16) & 0xff) + '.' +
           std::to_string((ip >> 8) & 0xff) + '.' + std::to_string(ip & 0xff);
}

namespace detail {

/// Appends integers to a byte buffer. File-order fields (pcap headers) honor
/// the swapped flag; frame contents always go through the big-endian calls.
class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& buf, bool swapped = false)
        : buf_(buf), swapped_(swapped) {}

    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16_file(std::uint16_t v) { swapped_ ? be16(v) : le16(v); }
    void u32_file(std::uint32_t v) { swapped_ ? be32(v) : le32(v); }

    void be16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }
    void be32(std::uint32_t v) {
        be16(static_cast<std::uint16_t>(v >> 16));
        be16(static_cast<std::uint16_t>(v));
    }
    void le16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void le32(std::uint32_t v) {
        le16(static_cast<std::uint16_t>(v));
        le16(static_cast<std::uint16_t>(v >> 16));
    }
    void bytes(const std::uint8_t* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    void fill(std::size_t n, std::uint8_t v) { buf_.insert(buf_.end(), n, v); }

private:
    std::vector<std::uint8_t>& buf_;
    bool swapped_;
};

/// Bounds-checked reads over a captured byte range.
class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::size_t remaining() const { return size_ - pos_; }
    std::size_t pos() const { return pos_; }
    bool need(std::size_t n) const { return remaining() >= n; }
    void skip(std::size_t n) { pos_ += n; }

    std::uint8_t u8() { return data_[pos_++]; }
    std::uint16_t be16() {
        const std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32_file(bool swapped) {
        std::uint32_t v;
        std::memcpy(&v, data_ + pos_, 4);
        pos_ += 4;
        return swapped ? byteswap32(v) : v;
    }
    std::uint16_t u16_file(bool swapped) {
        std::uint16_t v;
        std::memcpy(&v, data_ + pos_, 2);
        pos_ += 2;
        return swapped ? static_cast<std::uint16_t>((v >> 8) | (v << 8)) : v;
    }

    static std::uint32_t byteswap32(std::uint32_t v) {
        return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint16_t ones_complement_sum(const std::uint8_t* data, std::size_t len,
                                         std::uint32_t seed = 0) {
    std::uint32_t sum = seed;
    for (std::size_t i = 0; i + 1 < len; i += 2)
        sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
    if (len & 1) sum += static_cast<std::uint32_t>(data[len - 1] << 8);
    while (sum >> 16) sum = (sum & 0xffffu) + (sum >> 16);
    return static_cast<std::uint16_t>(sum);
}

} // namespace detail
} // namespace covertdns
