#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "covertdns/errors.hpp"
#include "covertdns/rng.hpp"

namespace covertdns {

struct DomainRecord {
    std::string name;   // lowercased, LDH labels joined by dots
    std::string family; // family label
    std::size_t length; // character count of name

    bool operator==(const DomainRecord&) const = default;
};

/// Ordered collection of candidate C&C domains for one family. Order is
/// preserved exactly as loaded/generated; it defines the downstream time
/// series.
struct DomainSet {
    std::string family;
    std::vector<DomainRecord> records;

    bool operator==(const DomainSet&) const = default;
};

struct LengthStats {
    std::size_t min = 0;
    std::size_t max = 0;
    double average = 0.0;
    double stdev = 0.0; // population standard deviation
    std::size_t unique_count = 0;
};

/// Parameterized length distribution used to synthesize a domain set when no
/// published list is at hand.
struct FamilyLengthModel {
    std::string family;
    std::size_t min = 0;
    std::size_t max = 0;
    double average = 0.0;
    double stdev = 0.0;
    std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string tld = ".com";
};

namespace detail {

inline void validate_length_model(const FamilyLengthModel& m) {
    if (m.min > m.max)
        fail(Errc::invalid_model, "length min > max for " + m.family);
    if (m.average < static_cast<double>(m.min) || m.average > static_cast<double>(m.max))
        fail(Errc::invalid_model, "length average outside [min, max] for " + m.family);
    if (m.stdev < 0.0) fail(Errc::invalid_model, "negative length stdev");
    if (m.alphabet.empty()) fail(Errc::invalid_model, "empty alphabet");
    if (m.tld.empty() || m.tld.front() != '.')
        fail(Errc::invalid_model, "tld must start with '.'");
    if (m.max < m.tld.size() + 1)
        fail(Errc::invalid_model, "max length cannot fit tld plus one label character");
}

} // namespace detail

/// Loads a one-domain-per-line list. Blank lines and '#' comments are
/// skipped, names are trimmed and lowercased. With keep_duplicates=false,
/// repeated names (after normalization) are dropped.
inline DomainSet load_domain_list(std::istream& source, const std::string& family,
                                  bool keep_duplicates = true) {
    DomainSet set;
    set.family = family;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const std::size_t e = line.find_last_not_of(" \t");
        std::string name = line.substr(b, e - b + 1);
        if (name[0] == '#') continue;
        for (char& c : name) {
            if (std::isspace(static_cast<unsigned char>(c)))
                fail(Errc::malformed_domain,
                     "whitespace inside domain at line " + std::to_string(lineno));
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (name.find('.') == std::string::npos)
            fail(Errc::malformed_domain, "no dot in domain at line " + std::to_string(lineno));
        if (name.size() > 253)
            fail(Errc::malformed_domain, "domain exceeds 253 chars at line " + std::to_string(lineno));
        if (!keep_duplicates && !seen.insert(name).second) continue;
        set.records.push_back(DomainRecord{name, family, name.size()});
    }
    if (set.records.empty()) fail(Errc::empty_dataset, "no valid domains in input");
    return set;
}

/// One name per line; load_domain_list on the output reproduces the set.
inline void serialize_domain_list(const DomainSet& set, std::ostream& sink) {
    for (const auto& r : set.records) sink << r.name << '\n';
    if (!sink) fail(Errc::io_failure, "domain list write failed");
}

inline LengthStats length_stats(const DomainSet& set) {
    if (set.records.empty()) fail(Errc::empty_dataset, "length_stats on empty set");
    LengthStats st;
    st.min = set.records.front().length;
    st.max = st.min;
    double sum = 0.0;
    std::set<std::size_t> distinct;
    for (const auto& r : set.records) {
        st.min = std::min(st.min, r.length);
        st.max = std::max(st.max, r.length);
        sum += static_cast<double>(r.length);
        distinct.insert(r.length);
    }
    const double n = static_cast<double>(set.records.size());
    st.average = sum / n;
    double ss = 0.0;
    for (const auto& r : set.records) {
        const double d = static_cast<double>(r.length) - st.average;
        ss += d * d;
    }
    st.stdev = std::sqrt(ss / n);
    st.unique_count = distinct.size();
    return st;
}

/// Synthesizes `count` domains whose length distribution follows the model:
/// lengths are rounded normal(average, stdev) draws truncated to [min, max]
/// by resampling, names are uniform draws from the alphabet with the tld
/// appended. Deterministic in (model, count, seed).
inline DomainSet generate_parametric(const FamilyLengthModel& model, std::size_t count,
                                     std::uint64_t seed) {
    detail::validate_length_model(model);
    if (count == 0) fail(Errc::invalid_model, "count must be at least 1");

    DomainSet set;
    set.family = model.family;
    set.records.reserve(count);
    Rng rng(seed);

    for (std::size_t i = 0; i < count; ++i) {
        long long len;
        if (model.stdev == 0.0) {
            len = std::llround(model.average);
        } else {
            int tries = 0;
            do {
                len = std::llround(model.average + model.stdev * rng.normal());
            } while ((len < static_cast<long long>(model.min) ||
                      len > static_cast<long long>(model.max)) &&
                     ++tries < 1000);
            len = std::clamp<long long>(len, static_cast<long long>(model.min),
                                        static_cast<long long>(model.max));
        }
        const std::size_t label_len =
            std::max<std::size_t>(1, static_cast<std::size_t>(len) - model.tld.size());
        std::string name;
        name.reserve(label_len + model.tld.size());
        for (std::size_t j = 0; j < label_len; ++j)
            name.push_back(model.alphabet[rng.below(model.alphabet.size())]);
        name += model.tld;
        set.records.push_back(DomainRecord{name, model.family, name.size()});
    }
    return set;
}

} // namespace covertdns
