#pragma once

// Compressed Bundle Reporting: the Compressed Reporting Extension Block
// (CREB), Compressed Reporting Signals (CRS) and the per-node agent that
// aggregates status events into pending signals.

#include "bprel/admin_record.hpp"
#include "bprel/bundle.hpp"
#include "bprel/sequence_collection.hpp"
#include "bprel/signal_draft.hpp"

#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace bprel {

enum class ReportReason : std::uint64_t {
    reception = 0,
    forwarding = 1,
    delivery = 2,
    deletion = 3,
};

const char* to_string(ReportReason reason) noexcept;
/// Throws Error for names other than reception/forwarding/delivery/deletion.
ReportReason parse_report_reason(std::string_view name);

/// Requested report types as a bitmask: bit k set requests reason code k.
class ReportTypes {
public:
    constexpr ReportTypes() = default;
    constexpr explicit ReportTypes(std::uint64_t mask) : mask_(mask) {}
    static ReportTypes of(std::initializer_list<ReportReason> reasons);

    constexpr std::uint64_t mask() const noexcept { return mask_; }
    constexpr bool requests(ReportReason reason) const noexcept {
        return (mask_ >> static_cast<std::uint64_t>(reason)) & 1U;
    }
    constexpr bool empty() const noexcept { return mask_ == 0; }
    /// `delivery|deletion`, `none` when empty.
    std::string str() const;

    friend constexpr bool operator==(ReportTypes, ReportTypes) = default;

private:
    std::uint64_t mask_ = 0;
};

/// Parses `a|b|c` lists of reason names (or `none`).
ReportTypes parse_report_types(std::string_view text);

/// CREB contents as carried on the wire. A field may only be present when
/// every earlier field is.
struct CrebData {
    std::uint64_t sequence_number = 0;
    std::optional<std::uint64_t> sequence_id;
    std::optional<ReportTypes> report_types;
    std::optional<EndpointId> block_source;
    std::optional<EndpointId> report_endpoint;

    friend bool operator==(const CrebData&, const CrebData&) = default;
};

/// Throws PrefixViolation when a later field is set without an earlier one.
Bytes encode_creb(const CrebData& creb);
/// Throws MalformedBlock.
CrebData decode_creb(ByteView bytes);

CanonicalBlock make_creb_block(const CrebData& creb);

/// CREB with its decoding defaults applied against the carrying bundle.
struct ResolvedCreb {
    BundleTag tag;
    ReportTypes report_types;
    EndpointId report_destination;
};

/// Report endpoint if present, else block source, else bundle source.
EndpointId resolve_report_destination(const CrebData& creb, const PrimaryBlock& primary);
ResolvedCreb resolve_creb(const CrebData& creb, const PrimaryBlock& primary);

/// Decodes every CREB of a bundle, in block order.
std::vector<ResolvedCreb> resolved_crebs(const Bundle& bundle);

using CrsSignal = FlushedSignal<std::uint64_t>;
using CrsContents = std::map<std::uint64_t, std::set<BundleTag>>;

/// Administrative record `[64, {reason: collection}]` with keys ascending.
/// Block sources equal to the destination's administrative EID are omitted.
Bytes build_crs(const CrsSignal& signal);
/// Collections exactly as encoded, keyed by reason code.
std::map<std::uint64_t, BundleSequenceCollection> decode_crs(ByteView record);
/// Throws MalformedSignal on non-map content, non-integer keys or a record
/// type other than CRS.
CrsContents parse_crs(ByteView record, const EndpointId& receiver_admin);

/// Numbers in [lo, hi] with no tag of `scope` in `reported`.
std::set<std::uint64_t> detect_gaps(const std::set<BundleTag>& reported, const SequenceScope& scope,
                                    std::uint64_t lo, std::uint64_t hi);

/// One status event matched against one CREB and queued.
struct RecordedReport {
    BundleTag tag;
    ReportReason reason;
    EndpointId destination;
};

struct RecordOutcome {
    std::vector<RecordedReport> recorded;
    /// Signals flushed because they reached the bundle threshold.
    std::vector<CrsSignal> flushed;
};

/// Per-node CRS aggregation. CREBs inserted by this node itself are not
/// reported on.
class ReportingAgent {
public:
    ReportingAgent(const EndpointId& self_admin, FlushPolicy policy);

    RecordOutcome record_event(const Bundle& bundle, ReportReason event, SimTime now);
    std::vector<CrsSignal> poll_flush(SimTime now) { return drafts_.poll(now); }
    std::optional<SimTime> next_deadline() const { return drafts_.next_deadline(); }
    const DraftTable<std::uint64_t>& drafts() const noexcept { return drafts_; }

private:
    EndpointId self_admin_;
    DraftTable<std::uint64_t> drafts_;
};

} // namespace bprel
