#pragma once

#include <stdexcept>
#include <string>

namespace csmt {

enum class errc {
    serialization_overflow,
    quantization_overflow,
    aggregation_overflow,
    out_of_range,
    shape_mismatch,
    scale_mismatch,
    leaf_collision,
    duplicate_entry,
    not_found,
    not_built,
    division_by_zero,
    index_mismatch,
    witness_mismatch,
    key_kind,
    unknown_circuit,
    incomplete_bundle,
    io_failure,
    crypto_failure,
    transport_failure,
    bad_request,
};

const char* errc_name(errc code) noexcept;

/// Operational failure. Verification outcomes are never reported through
/// exceptions; they travel in result structs with explicit reason codes.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

} // namespace csmt
