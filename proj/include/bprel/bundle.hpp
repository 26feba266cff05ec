#pragma once

// The subset of the BPv7 bundle format this project needs: primary block,
// canonical blocks with optional CRC-16/CRC-32C, no fragmentation.

#include "bprel/cbor.hpp"
#include "bprel/eid.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace bprel {

enum class CrcType : std::uint8_t { none = 0, crc16 = 1, crc32c = 2 };

namespace bundle_flags {
inline constexpr std::uint64_t is_fragment = 0x000001;
inline constexpr std::uint64_t admin_record = 0x000002;
inline constexpr std::uint64_t must_not_fragment = 0x000004;
} // namespace bundle_flags

namespace block_type {
inline constexpr std::uint64_t payload = 1;
/// Compressed Reporting Extension Block (private-use range).
inline constexpr std::uint64_t creb = 192;
/// Custody Transfer Extension Block (private-use range).
inline constexpr std::uint64_t cteb = 193;
} // namespace block_type

struct PrimaryBlock {
    static constexpr std::uint64_t kVersion = 7;

    std::uint64_t flags = bundle_flags::must_not_fragment;
    CrcType crc_type = CrcType::crc32c;
    EndpointId destination;
    EndpointId source;
    EndpointId report_to;
    std::uint64_t creation_time_ms = 0;
    std::uint64_t creation_sequence = 0;
    std::uint64_t lifetime_ms = 3'600'000;

    bool is_admin_record() const noexcept { return (flags & bundle_flags::admin_record) != 0; }

    friend bool operator==(const PrimaryBlock&, const PrimaryBlock&) = default;
};

struct CanonicalBlock {
    std::uint64_t type_code = 0;
    std::uint64_t number = 0;
    std::uint64_t flags = 0;
    CrcType crc_type = CrcType::crc32c;
    Bytes data;

    friend bool operator==(const CanonicalBlock&, const CanonicalBlock&) = default;
};

/// Source EID plus creation timestamp: the RFC 9171 bundle identity, which
/// custodial retransmission preserves.
struct BundleId {
    EndpointId source;
    std::uint64_t creation_time_ms = 0;
    std::uint64_t creation_sequence = 0;

    std::string str() const;

    friend auto operator<=>(const BundleId&, const BundleId&) = default;
};

struct Bundle {
    PrimaryBlock primary;
    /// Extension blocks in order; the payload block is always last.
    std::vector<CanonicalBlock> blocks;

    BundleId id() const { return {primary.source, primary.creation_time_ms, primary.creation_sequence}; }

    const CanonicalBlock& payload() const;
    std::vector<const CanonicalBlock*> blocks_of_type(std::uint64_t type_code) const;
    const CanonicalBlock* find_block(std::uint64_t type_code) const;
    CanonicalBlock* find_block(std::uint64_t type_code);
    std::size_t count_blocks(std::uint64_t type_code) const;
    /// Smallest unused block number greater than 1.
    std::uint64_t next_block_number() const;
    /// Inserts an extension block just before the payload block, assigning
    /// a fresh block number if `block.number` is 0.
    CanonicalBlock& add_extension(CanonicalBlock block);

    friend bool operator==(const Bundle&, const Bundle&) = default;
};

/// Builds a bundle with a single payload block.
Bundle make_bundle(const PrimaryBlock& primary, ByteView payload);

/// Throws MalformedBundle if the structural invariants do not hold: exactly
/// one payload block (number 1, last), unique block numbers, at most one
/// CTEB.
void validate_bundle(const Bundle& bundle);

Bytes encode_bundle(const Bundle& bundle);

/// Throws MalformedBundle on structural problems and CrcMismatch when a
/// block CRC does not verify.
Bundle decode_bundle(ByteView bytes);

} // namespace bprel
