#pragma once

#include <stdexcept>
#include <string>

namespace covertdns {

/// Failure categories surfaced by the library. The CLI maps these onto
/// process exit codes; tests match on them directly.
enum class Errc {
    empty_dataset,
    malformed_domain,
    invalid_model,
    bad_magic,
    truncated_header,
    unsupported_link_type,
    empty_series,
    series_too_short,
    constant_series,
    lag_too_large,
    singular_design,
    degenerate_groups,
    zero_within_variance,
    empty_database,
    config_mismatch,
    schema_violation,
    duplicate_family,
    not_reached,
    invalid_config,
    io_failure,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::empty_dataset: return "EmptyDataset";
        case Errc::malformed_domain: return "MalformedDomain";
        case Errc::invalid_model: return "InvalidModel";
        case Errc::bad_magic: return "BadMagic";
        case Errc::truncated_header: return "TruncatedHeader";
        case Errc::unsupported_link_type: return "UnsupportedLinkType";
        case Errc::empty_series: return "EmptySeries";
        case Errc::series_too_short: return "SeriesTooShort";
        case Errc::constant_series: return "ConstantSeries";
        case Errc::lag_too_large: return "LagTooLarge";
        case Errc::singular_design: return "SingularDesign";
        case Errc::degenerate_groups: return "DegenerateGroups";
        case Errc::zero_within_variance: return "ZeroWithinVariance";
        case Errc::empty_database: return "EmptyDatabase";
        case Errc::config_mismatch: return "ConfigMismatch";
        case Errc::schema_violation: return "SchemaViolation";
        case Errc::duplicate_family: return "DuplicateFamily";
        case Errc::not_reached: return "NotReached";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::io_failure: return "IoFailure";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace covertdns
