#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "covertdns/domains.hpp"
#include "covertdns/errors.hpp"
#include "covertdns/pcap.hpp"
#include "covertdns/rng.hpp"
#include "covertdns/series.hpp"

namespace covertdns {

enum class TransportMode { DOH, DOT };

inline std::uint16_t server_port(TransportMode mode) {
    return mode == TransportMode::DOH ? 443 : 853;
}

inline const char* mode_name(TransportMode mode) {
    return mode == TransportMode::DOH ? "doh" : "dot";
}

// Every DoT response is observed as two server packets, the first always
// 97 bytes on the wire.
inline constexpr double kDotLeadingSize = 97.0;

/// Per-family/mode response-size distribution. A response size is
/// round(clamp(base + length_coupling * domain_length + noise)) where base is
/// calibrated so the expected clamped size equals size_avg, and noise is
/// normal(0, size_stdev).
struct ResponseSizeModel {
    std::string family;
    TransportMode mode = TransportMode::DOH;
    double size_min = 0.0;
    double size_max = 0.0;
    double size_avg = 0.0;
    double size_stdev = 0.0;
    std::size_t unique_count = 1;
    double length_coupling = 0.0;
    double length_anchor = 0.0; // average domain length used when no domain set is at hand
};

inline void validate_model(const ResponseSizeModel& m) {
    if (m.size_min > m.size_avg || m.size_avg > m.size_max)
        fail(Errc::invalid_model, "size stats must satisfy min <= avg <= max for " + m.family);
    if (m.size_stdev < 0.0) fail(Errc::invalid_model, "negative size stdev");
    if (m.unique_count < 1) fail(Errc::invalid_model, "unique_count must be at least 1");
    if (m.unique_count == 1 && m.size_min != m.size_max)
        fail(Errc::invalid_model, "unique_count 1 requires size_min == size_max");
    if (m.size_min < kMinTlsFrame)
        fail(Errc::invalid_model, "size_min below the smallest representable TLS frame");
}

/// Default slope when a model does not pin one: spread the size range over
/// the length range.
inline double default_length_coupling(const ResponseSizeModel& m, double len_min,
                                      double len_max) {
    return len_max > len_min ? (m.size_max - m.size_min) / (len_max - len_min) : 0.0;
}

struct SimSession {
    DomainSet domains;
    TransportMode mode = TransportMode::DOH;
    ResponseSizeModel model;
    std::string resolver_addr = "1.1.1.1";
    std::string client_addr = "192.168.1.10";
    std::uint64_t seed = 0;
};

namespace detail {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / 2.5066282746310005024; // sqrt(2*pi)
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

/// E[clamp(X, lo, hi)] for X ~ N(mu, sigma), closed form.
inline double clamped_normal_mean(double mu, double sigma, double lo, double hi) {
    if (sigma <= 0.0) return std::clamp(mu, lo, hi);
    const double a = (lo - mu) / sigma;
    const double b = (hi - mu) / sigma;
    return lo * norm_cdf(a) + hi * (1.0 - norm_cdf(b)) + mu * (norm_cdf(b) - norm_cdf(a)) +
           sigma * (norm_pdf(a) - norm_pdf(b));
}

/// Expected session mean size as a function of the intercept, over the given
/// domain lengths. Monotone non-decreasing in base.
inline double expected_mean_for_base(const ResponseSizeModel& m, double base,
                                     std::span<const std::size_t> lengths) {
    double acc = 0.0;
    for (std::size_t len : lengths)
        acc += clamped_normal_mean(base + m.length_coupling * static_cast<double>(len),
                                   m.size_stdev, m.size_min, m.size_max);
    return acc / static_cast<double>(lengths.size());
}

} // namespace detail

/// Solves for the intercept that makes the expected clamped size match
/// size_avg over the given length distribution. Bisection; the expectation is
/// continuous and monotone in the intercept.
inline double calibrate_base(const ResponseSizeModel& m, std::span<const std::size_t> lengths) {
    validate_model(m);
    if (lengths.empty()) fail(Errc::empty_dataset, "calibration needs at least one length");
    if (m.size_min == m.size_max) return m.size_avg;

    double len_lo = static_cast<double>(lengths.front());
    double len_hi = len_lo;
    for (std::size_t len : lengths) {
        len_lo = std::min(len_lo, static_cast<double>(len));
        len_hi = std::max(len_hi, static_cast<double>(len));
    }
    const double pad = 10.0 * m.size_stdev + 10.0;
    double lo = m.size_min - std::abs(m.length_coupling) * len_hi - pad;
    double hi = m.size_max + std::abs(m.length_coupling) * len_hi + pad;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::expected_mean_for_base(m, mid, lengths) < m.size_avg)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Model plus its solved intercept; the unit the samplers consume.
struct CalibratedModel {
    ResponseSizeModel model;
    double base = 0.0;
};

inline CalibratedModel calibrate(const ResponseSizeModel& m,
                                 std::span<const std::size_t> lengths) {
    return CalibratedModel{m, calibrate_base(m, lengths)};
}

/// Calibration at the model's length anchor alone, for standalone
/// per-response use.
inline CalibratedModel calibrate(const ResponseSizeModel& m) {
    const std::size_t anchor =
        static_cast<std::size_t>(std::llround(std::max(0.0, m.length_anchor)));
    const std::size_t one[1] = {anchor};
    return CalibratedModel{m, calibrate_base(m, std::span<const std::size_t>(one, 1))};
}

namespace detail {

inline double sample_size(const CalibratedModel& cm, std::size_t domain_length, double z) {
    const ResponseSizeModel& m = cm.model;
    const double raw = cm.base + m.length_coupling * static_cast<double>(domain_length) +
                       m.size_stdev * z;
    const double clamped = std::clamp(raw, m.size_min, m.size_max);
    const double rounded = std::round(clamped);
    return std::clamp(rounded, m.size_min, m.size_max);
}

inline void emit_response(const CalibratedModel& cm, std::size_t domain_length, double z,
                          std::vector<double>& out) {
    if (cm.model.mode == TransportMode::DOT) {
        out.push_back(kDotLeadingSize);
        out.push_back(sample_size(cm, domain_length, z));
    } else {
        out.push_back(sample_size(cm, domain_length, z));
    }
}

} // namespace detail

/// Payload sizes one covert query for `domain` produces on the wire:
/// two packets for DoT (97 then the drawn size), one for DoH.
inline std::vector<double> simulate_response(const DomainRecord& domain,
                                             const ResponseSizeModel& model, Rng& rng) {
    const CalibratedModel cm = calibrate(model);
    std::vector<double> out;
    detail::emit_response(cm, domain.length, rng.normal(), out);
    return out;
}

inline std::vector<double> simulate_response(const DomainRecord& domain,
                                             const CalibratedModel& cm, double z) {
    std::vector<double> out;
    detail::emit_response(cm, domain.length, z, out);
    return out;
}

/// Resolves every domain of the session in order and concatenates the
/// response sizes. The intercept is calibrated against the session's own
/// length distribution and the session noise vector is recentered to mean 0
/// and unit spread, so session statistics track the model tightly.
/// Deterministic in the seed.
inline SizeSeries simulate_session(const SimSession& session) {
    if (session.domains.records.empty()) fail(Errc::empty_dataset, "session has no domains");
    if (session.model.mode != session.mode)
        fail(Errc::config_mismatch, "session mode differs from model mode");
    if (session.model.family != session.domains.family)
        fail(Errc::config_mismatch, "session family differs from model family");

    std::vector<std::size_t> lengths;
    lengths.reserve(session.domains.records.size());
    for (const auto& r : session.domains.records) lengths.push_back(r.length);
    const CalibratedModel cm = calibrate(session.model, lengths);

    const std::size_t n = lengths.size();
    Rng rng(session.seed);
    std::vector<double> z(n);
    for (double& v : z) v = rng.normal();
    if (n >= 2) {
        double mean = 0.0;
        for (double v : z) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : z) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd > 1e-12)
            for (double& v : z) v = (v - mean) / sd;
    } else {
        z[0] = 0.0;
    }

    SizeSeries series;
    series.label = session.domains.family;
    series.values.reserve(session.mode == TransportMode::DOT ? 2 * n : n);
    for (std::size_t i = 0; i < n; ++i)
        detail::emit_response(cm, lengths[i], z[i], series.values);
    return series;
}

// ---------------------------------------------------------------------------
// pcap emission
// ---------------------------------------------------------------------------

namespace detail {

// Fixed stand-ins for traffic the analyzers must learn to discard: TLS
// handshake frames in both directions and a client query placeholder.
inline constexpr std::uint32_t kHandshakeFrames[4] = {259, 1415, 117, 105};
inline constexpr bool kHandshakeFromClient[4] = {true, false, true, false};
inline constexpr std::uint32_t kQueryFrame = 120;
inline constexpr std::uint16_t kClientPort = 52048;

struct PcapEndpoint {
    std::uint32_t ip;
    std::uint16_t port;
    std::uint32_t seq;
};

class PcapStream {
public:
    PcapStream(std::uint32_t client_ip, std::uint32_t server_ip, std::uint16_t srv_port,
               bool swapped)
        : swapped_(swapped),
          client_{client_ip, kClientPort, 1001},
          server_{server_ip, srv_port, 90001} {
        ByteWriter w(buf_, swapped_);
        w.u32_file(kPcapMagic);
        w.u16_file(2);
        w.u16_file(4);
        w.u32_file(0); // thiszone
        w.u32_file(0); // sigfigs
        w.u32_file(65535);
        w.u32_file(kLinkTypeEthernet);
    }

    /// One TCP frame carrying a single TLS record; frame_len is the total
    /// length on the wire.
    void tls_frame(bool from_client, std::uint8_t content_type, std::uint32_t frame_len) {
        if (frame_len < kMinTlsFrame)
            fail(Errc::invalid_model,
                 "frame of " + std::to_string(frame_len) + " bytes cannot carry a TLS record");
        PcapEndpoint& src = from_client ? client_ : server_;
        PcapEndpoint& dst = from_client ? server_ : client_;
        const std::uint32_t payload_len = frame_len - kFrameOverhead; // TLS header + body
        const std::uint16_t ip_total = static_cast<std::uint16_t>(frame_len - 14);

        ByteWriter w(buf_, swapped_);
        w.u32_file(ts_sec_);
        w.u32_file(ts_usec_);
        w.u32_file(frame_len); // incl_len: full capture
        w.u32_file(frame_len); // orig_len
        advance_clock();

        // Ethernet
        static constexpr std::uint8_t mac_client[6] = {0xaa, 0xbb, 0xcc, 0, 0, 0x01};
        static constexpr std::uint8_t mac_server[6] = {0xaa, 0xbb, 0xcc, 0, 0, 0x02};
        w.bytes(from_client ? mac_server : mac_client, 6);
        w.bytes(from_client ? mac_client : mac_server, 6);
        w.be16(0x0800);

        // IPv4 header
        std::vector<std::uint8_t> ip;
        ip.reserve(20);
        ByteWriter iw(ip);
        iw.u8(0x45);
        iw.u8(0);
        iw.be16(ip_total);
        iw.be16(ip_id_++);
        iw.be16(0x4000); // don't fragment
        iw.u8(64);
        iw.u8(6); // TCP
        iw.be16(0); // checksum placeholder
        iw.be32(src.ip);
        iw.be32(dst.ip);
        const std::uint16_t ip_ck =
            static_cast<std::uint16_t>(~ones_complement_sum(ip.data(), ip.size()));
        ip[10] = static_cast<std::uint8_t>(ip_ck >> 8);
        ip[11] = static_cast<std::uint8_t>(ip_ck);
        w.bytes(ip.data(), ip.size());

        // TCP header + TLS record
        std::vector<std::uint8_t> tcp;
        tcp.reserve(20 + payload_len);
        ByteWriter tw(tcp);
        tw.be16(src.port);
        tw.be16(dst.port);
        tw.be32(src.seq);
        tw.be32(dst.seq);
        tw.u8(0x50); // data offset 5
        tw.u8(0x18); // PSH|ACK
        tw.be16(0xfaf0);
        tw.be16(0); // checksum placeholder
        tw.be16(0);
        tw.u8(content_type);
        tw.be16(0x0303); // TLS 1.2 record version
        tw.be16(static_cast<std::uint16_t>(payload_len - 5));
        // Deterministic filler standing in for ciphertext.
        for (std::uint32_t i = 0; i < payload_len - 5; ++i)
            tw.u8(static_cast<std::uint8_t>((fill_state_ = fill_state_ * 6364136223846793005ull +
                                                           1442695040888963407ull) >>
                                            56));
        src.seq += payload_len;

        // TCP checksum over pseudo-header + segment
        std::uint32_t pseudo = 0;
        pseudo += (src.ip >> 16) + (src.ip & 0xffffu);
        pseudo += (dst.ip >> 16) + (dst.ip & 0xffffu);
        pseudo += 6;
        pseudo += static_cast<std::uint32_t>(tcp.size());
        const std::uint16_t tcp_ck = static_cast<std::uint16_t>(
            ~ones_complement_sum(tcp.data(), tcp.size(), pseudo));
        tcp[16] = static_cast<std::uint8_t>(tcp_ck >> 8);
        tcp[17] = static_cast<std::uint8_t>(tcp_ck);
        w.bytes(tcp.data(), tcp.size());
    }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    void advance_clock() {
        ts_usec_ += 250;
        if (ts_usec_ >= 1000000) {
            ts_usec_ -= 1000000;
            ++ts_sec_;
        }
    }

    std::vector<std::uint8_t> buf_;
    bool swapped_;
    PcapEndpoint client_;
    PcapEndpoint server_;
    std::uint32_t ts_sec_ = 1700000000;
    std::uint32_t ts_usec_ = 0;
    std::uint16_t ip_id_ = 1;
    std::uint64_t fill_state_ = 0x9e3779b97f4a7c15ull;
};

} // namespace detail

/// Serializes the session's wire view as a classic pcap capture: a fixed
/// synthetic TLS handshake, then per response a client query placeholder
/// followed by the server packets whose frame lengths reproduce `series`.
/// Returns the byte count written. With swapped_byte_order the file headers
/// are emitted in the opposite endianness (magic 0xd4c3b2a1).
inline std::size_t write_pcap(const SimSession& session, const SizeSeries& series,
                              std::ostream& sink, bool swapped_byte_order = false) {
    const std::uint32_t client_ip = parse_ipv4(session.client_addr);
    const std::uint32_t server_ip = parse_ipv4(session.resolver_addr);
    const std::size_t per_response = session.mode == TransportMode::DOT ? 2 : 1;
    if (series.size() % per_response != 0)
        fail(Errc::config_mismatch, "series length does not match the session transport mode");

    detail::PcapStream stream(client_ip, server_ip, server_port(session.mode),
                              swapped_byte_order);
    for (int i = 0; i < 4; ++i)
        stream.tls_frame(detail::kHandshakeFromClient[i], kTlsHandshake,
                         detail::kHandshakeFrames[i]);
    for (std::size_t i = 0; i < series.size(); i += per_response) {
        stream.tls_frame(true, kTlsApplicationData, detail::kQueryFrame);
        for (std::size_t j = 0; j < per_response; ++j)
            stream.tls_frame(false, kTlsApplicationData,
                             static_cast<std::uint32_t>(std::llround(series.values[i + j])));
    }

    const auto& bytes = stream.bytes();
    sink.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!sink) fail(Errc::io_failure, "pcap write failed");
    return bytes.size();
}

} // namespace covertdns
