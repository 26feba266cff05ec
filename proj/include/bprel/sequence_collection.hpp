#pragma once

// Run-length compressed sets of bundle tags, the common payload of
// Compressed Reporting Signals and Compressed Custody Signals.

#include "bprel/cbor.hpp"
#include "bprel/sequence.hpp"

#include <optional>
#include <set>
#include <vector>

namespace bprel {

/// Sequence numbers first .. first + length - 1 of one scope.
struct BundleSequence {
    std::uint64_t first = 0;
    std::uint64_t length = 1;
    SequenceScope scope;
    /// Omitted on the wire when equal to the receiver's administrative EID.
    std::optional<EndpointId> block_source;

    std::uint64_t last() const noexcept { return first + length - 1; }
    std::string str() const;

    friend bool operator==(const BundleSequence&, const BundleSequence&) = default;
};

using BundleSequenceCollection = std::vector<BundleSequence>;

/// Groups tags by (scope, block source) and emits maximal runs, ordered by
/// scope text, block source and first number. Every sequence carries an
/// explicit block source.
BundleSequenceCollection coalesce(const std::set<BundleTag>& tags);

/// Inverse of coalesce. Sequences without a block source are attributed to
/// `receiver_admin`. Throws SequenceOverflow when a sequence runs past
/// `max_value`.
std::set<BundleTag> expand(const BundleSequenceCollection& collection, const EndpointId& receiver_admin,
                           std::uint64_t max_value = kDefaultSequenceMax);

/// Drops block sources equal to `receiver_admin`.
void omit_receiver_source(BundleSequenceCollection& collection, const EndpointId& receiver_admin);
/// Drops every block source.
void omit_all_sources(BundleSequenceCollection& collection);

/// Writes the collection exactly as given (definite-length arrays).
void encode_collection(cbor::Writer& out, const BundleSequenceCollection& collection);
/// Throws MalformedSignal.
BundleSequenceCollection decode_collection(cbor::Reader& in);

} // namespace bprel
