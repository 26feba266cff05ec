#pragma once

#include "bprel/cbor.hpp"

#include <cstdint>

namespace bprel {

namespace admin_record_type {
inline constexpr std::uint64_t status_report = 1;
/// Compressed Reporting Signal.
inline constexpr std::uint64_t crs = 64;
/// Compressed Custody Signal.
inline constexpr std::uint64_t ccs = 65;
} // namespace admin_record_type

struct AdminRecord {
    std::uint64_t type_code = 0;
    /// Encoded CBOR item carried as the record content.
    Bytes content;
};

/// `[type_code, content]`.
Bytes encode_admin_record(std::uint64_t type_code, ByteView content);
/// Throws MalformedSignal.
AdminRecord decode_admin_record(ByteView payload);

} // namespace bprel
