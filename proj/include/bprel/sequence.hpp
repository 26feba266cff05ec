#pragma once

// Sequence-based bundle identification: Bundle Sequence IDs, per-scope
// counters and the network-unique tag triple.

#include "bprel/bundle.hpp"
#include "bprel/eid.hpp"

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace bprel {

/// A sequence is named either by an explicit ID >= 1 or, for the reserved
/// ID 0, by the destination EID of its bundles.
class SequenceScope {
public:
    SequenceScope() = default;

    /// Throws Error for id 0; use per_destination for the reserved ID.
    static SequenceScope explicit_id(std::uint64_t id);
    static SequenceScope per_destination(const EndpointId& destination);
    /// Maps a wire Sequence ID to a scope; 0 selects the bundle destination.
    static SequenceScope from_wire(std::uint64_t id, const EndpointId& destination);

    bool is_per_destination() const noexcept { return id_ == 0; }
    /// The on-wire Sequence ID (0 for per-destination scopes).
    std::uint64_t wire_id() const noexcept { return id_; }
    const EndpointId& destination() const noexcept { return destination_; }

    /// `id:<n>` or `dst:ipn:<node>.<service>`.
    std::string str() const;

    friend auto operator<=>(const SequenceScope&, const SequenceScope&) = default;

private:
    std::uint64_t id_ = 0;
    EndpointId destination_;
};

/// {scope, sequence number, block source administrative EID}.
struct BundleTag {
    SequenceScope scope;
    std::uint64_t number = 0;
    EndpointId block_source;

    /// `<block source>/<scope>#<number>`, e.g. `ipn:31.0/dst:ipn:21.1#17`.
    std::string str() const;

    friend auto operator<=>(const BundleTag&, const BundleTag&) = default;
};

/// Throws Error when `text` is not in the form produced by BundleTag::str.
BundleTag parse_tag(std::string_view text);
SequenceScope parse_scope(std::string_view text);

inline constexpr std::uint64_t kDefaultSequenceMax = std::numeric_limits<std::uint32_t>::max();

/// Per-node Bundle Sequence Counters, one per scope, wrapping modulo
/// max_value + 1.
class SequenceCounterTable {
public:
    explicit SequenceCounterTable(std::uint64_t max_value = kDefaultSequenceMax);

    /// Returns the scope's current value and advances it.
    std::uint64_t next(const SequenceScope& scope);
    /// Current value without advancing (0 for unseen scopes).
    std::uint64_t peek(const SequenceScope& scope) const;

    std::uint64_t max_value() const noexcept { return max_value_; }
    const std::map<SequenceScope, std::uint64_t>& counters() const noexcept { return counters_; }

private:
    std::uint64_t max_value_;
    std::map<SequenceScope, std::uint64_t> counters_;
};

/// Resolves the identification fields carried by an extension block into a
/// tag. An absent or zero scope selects the bundle destination; an absent
/// block source defaults to the administrative EID of the bundle source.
BundleTag derive_tag(std::optional<std::uint64_t> scope_field, std::uint64_t sequence_number,
                     const std::optional<EndpointId>& block_source_field, const PrimaryBlock& primary);

} // namespace bprel
