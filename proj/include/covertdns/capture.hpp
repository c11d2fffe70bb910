#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "covertdns/errors.hpp"
#include "covertdns/pcap.hpp"
#include "covertdns/series.hpp"

namespace covertdns {

/// One captured packet, reduced to the fields the analyzers need.
struct PacketRecord {
    std::uint32_t ts_sec = 0;
    std::uint32_t ts_usec = 0;
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t frame_len = 0; // bytes on the wire (orig_len)
    std::optional<std::uint8_t> tls_content_type; // first record's type, when payload is TLS
    std::uint32_t tls_record_count = 0; // >1 flags unsplit multi-record packets
};

/// Which packets count as resolver responses.
struct FlowFilter {
    std::set<std::uint32_t> resolver_addrs;
    std::set<std::uint16_t> server_ports{443, 853};
};

struct SizeStats {
    double min = 0.0;
    double max = 0.0;
    double average = 0.0;
    double stdev = 0.0; // population
    std::size_t unique_count = 0;
};

/// Parses a classic pcap byte stream (either byte order, Ethernet linktype).
/// Non-IPv4 and non-TCP packets are skipped silently; reads never run past a
/// packet's declared captured length.
inline std::vector<PacketRecord> parse_pcap(std::istream& source) {
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(source)),
                                   std::istreambuf_iterator<char>());
    if (data.size() < 4) fail(Errc::truncated_header, "stream shorter than a pcap magic");
    detail::ByteReader global(data.data(), data.size());

    const std::uint32_t magic = global.u32_file(false);
    bool swapped = false;
    if (magic == kPcapMagic) {
        swapped = false;
    } else if (magic == kPcapMagicSwapped) {
        swapped = true;
    } else if (magic == kPcapngMagic) {
        fail(Errc::bad_magic, "pcapng input is not supported, supply a classic pcap file");
    } else {
        fail(Errc::bad_magic, "not a classic pcap stream");
    }
    if (data.size() < 24) fail(Errc::truncated_header, "truncated pcap global header");
    global.skip(2 + 2 + 4 + 4 + 4); // version, thiszone, sigfigs, snaplen
    const std::uint32_t linktype = global.u32_file(swapped);
    if (linktype != kLinkTypeEthernet)
        fail(Errc::unsupported_link_type, "linktype " + std::to_string(linktype));

    std::vector<PacketRecord> records;
    while (global.remaining() > 0) {
        if (!global.need(16)) fail(Errc::truncated_header, "truncated packet record header");
        PacketRecord rec;
        rec.ts_sec = global.u32_file(swapped);
        rec.ts_usec = global.u32_file(swapped);
        const std::uint32_t incl_len = global.u32_file(swapped);
        rec.frame_len = global.u32_file(swapped);
        if (!global.need(incl_len)) fail(Errc::truncated_header, "truncated packet body");
        const std::uint8_t* frame = data.data() + global.pos();
        global.skip(incl_len);

        detail::ByteReader r(frame, incl_len);
        if (!r.need(14)) continue;
        r.skip(12);
        if (r.be16() != 0x0800) continue; // not IPv4

        if (!r.need(20)) continue;
        const std::uint8_t ver_ihl = r.u8();
        if ((ver_ihl >> 4) != 4) continue;
        const std::size_t ihl = static_cast<std::size_t>(ver_ihl & 0x0f) * 4;
        if (ihl < 20) continue;
        r.skip(8); // tos, total length, id, flags/frag, ttl
        const std::uint8_t protocol = r.u8();
        r.skip(2); // header checksum
        rec.src_ip = (static_cast<std::uint32_t>(r.u8()) << 24) |
                     (static_cast<std::uint32_t>(r.u8()) << 16) |
                     (static_cast<std::uint32_t>(r.u8()) << 8) | r.u8();
        rec.dst_ip = (static_cast<std::uint32_t>(r.u8()) << 24) |
                     (static_cast<std::uint32_t>(r.u8()) << 16) |
                     (static_cast<std::uint32_t>(r.u8()) << 8) | r.u8();
        if (protocol != 6) continue; // not TCP
        if (ihl > 20) {
            if (!r.need(ihl - 20)) continue;
            r.skip(ihl - 20);
        }

        if (!r.need(20)) continue;
        rec.src_port = r.be16();
        rec.dst_port = r.be16();
        r.skip(8); // seq, ack
        const std::size_t data_off = static_cast<std::size_t>(r.u8() >> 4) * 4;
        if (data_off < 20) continue;
        r.skip(7); // flags, window, checksum, urgent
        if (data_off > 20) {
            if (!r.need(data_off - 20)) continue;
            r.skip(data_off - 20);
        }

        // TLS classification over the captured payload. Only the first
        // record's type is kept; additional whole records are counted so
        // multi-record packets can be flagged.
        while (r.need(5)) {
            const std::uint8_t type = r.u8();
            if (type < kTlsChangeCipherSpec || type > kTlsApplicationData) break;
            r.skip(2); // record version
            const std::uint16_t rec_len = r.be16();
            if (!rec.tls_content_type) rec.tls_content_type = type;
            ++rec.tls_record_count;
            if (!r.need(rec_len)) break;
            r.skip(rec_len);
        }
        records.push_back(rec);
    }
    return records;
}

inline bool matches_filter(const PacketRecord& rec, const FlowFilter& filter) {
    return rec.tls_content_type == kTlsApplicationData &&
           filter.resolver_addrs.count(rec.src_ip) > 0 &&
           filter.server_ports.count(rec.src_port) > 0;
}

/// Resolver-to-client application-data packets only, capture order preserved.
inline std::vector<PacketRecord> filter_records(const std::vector<PacketRecord>& records,
                                                const FlowFilter& filter) {
    if (filter.resolver_addrs.empty()) fail(Errc::invalid_config, "no resolver addresses");
    std::vector<PacketRecord> kept;
    for (const auto& rec : records)
        if (matches_filter(rec, filter)) kept.push_back(rec);
    return kept;
}

/// The frame lengths of the surviving packets, in capture order.
inline SizeSeries extract_size_series(const std::vector<PacketRecord>& records,
                                      const FlowFilter& filter) {
    SizeSeries series;
    for (const auto& rec : filter_records(records, filter))
        series.values.push_back(static_cast<double>(rec.frame_len));
    if (series.empty()) fail(Errc::empty_series, "no resolver response packets survive the filter");
    return series;
}

/// Statistics over the series after dropping the excluded byte values
/// (typically {97} for DoT).
inline SizeStats size_stats(const SizeSeries& series, const std::set<double>& exclude = {}) {
    std::vector<double> vals;
    vals.reserve(series.size());
    for (double v : series.values)
        if (exclude.count(v) == 0) vals.push_back(v);
    if (vals.empty()) fail(Errc::empty_series, "series empty after exclusion");

    SizeStats st;
    st.min = vals.front();
    st.max = vals.front();
    double sum = 0.0;
    std::set<double> distinct;
    for (double v : vals) {
        st.min = std::min(st.min, v);
        st.max = std::max(st.max, v);
        sum += v;
        distinct.insert(v);
    }
    const double n = static_cast<double>(vals.size());
    st.average = sum / n;
    double ss = 0.0;
    for (double v : vals) ss += (v - st.average) * (v - st.average);
    st.stdev = std::sqrt(ss / n);
    st.unique_count = distinct.size();
    return st;
}

} // namespace covertdns
