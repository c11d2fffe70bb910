#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "covertdns/errors.hpp"

namespace covertdns {

/// Ordered sequence of server-response sizes for one flow. This is the unit
/// every analysis stage consumes.
struct SizeSeries {
    std::vector<double> values;
    std::string label; // family label when known, empty otherwise

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    bool operator==(const SizeSeries&) const = default;
};

/// Series file format: one decimal integer (bytes) per line.
inline SizeSeries read_series(std::istream& in, const std::string& label = "") {
    SizeSeries s;
    s.label = label;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t");
        const std::string tok = line.substr(b, e - b + 1);
        if (tok[0] == '#') continue;
        try {
            std::size_t pos = 0;
            const long v = std::stol(tok, &pos);
            if (pos != tok.size() || v < 0)
                fail(Errc::io_failure, "bad series value at line " + std::to_string(lineno));
            s.values.push_back(static_cast<double>(v));
        } catch (const std::logic_error&) {
            fail(Errc::io_failure, "bad series value at line " + std::to_string(lineno));
        }
    }
    return s;
}

inline void write_series(const SizeSeries& s, std::ostream& out) {
    for (double v : s.values) out << static_cast<long long>(std::llround(v)) << '\n';
    if (!out) fail(Errc::io_failure, "series write failed");
}

} // namespace covertdns
