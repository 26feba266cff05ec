#pragma once

#include "bprel/cbor.hpp"

#include <cstdint>

namespace bprel {

/// CRC-16/X.25, the BPv7 "CRC-16" block check.
std::uint16_t crc16_x25(ByteView data);

/// CRC-32C (Castagnoli), the BPv7 "CRC-32C" block check.
std::uint32_t crc32c(ByteView data);

} // namespace bprel
