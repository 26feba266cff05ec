#pragma once

// Run metrics and log checks, computed from the event log alone.

#include "bprel/event_log.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bprel {

struct Metrics {
    std::uint64_t sent = 0;
    /// Distinct application bundles delivered.
    std::uint64_t delivered = 0;
    /// Application bundle transmissions lost on links.
    std::uint64_t lost = 0;
    /// Application bundles deleted by nodes, by any reason.
    std::uint64_t dropped = 0;
    std::uint64_t lost_or_dropped = 0;
    std::uint64_t undelivered = 0;
    std::uint64_t crs_count = 0;
    std::uint64_t ccs_count = 0;
    /// Administrative records plain per-bundle status reporting and custody
    /// signalling would have sent: one per reported event per bundle.
    std::uint64_t per_bundle_baseline = 0;
    std::uint64_t custody_accepted = 0;
    std::uint64_t custody_refused = 0;
    std::uint64_t retransmissions = 0;
    std::optional<SimTime> last_delivery;
    std::optional<SimTime> final_custody_release;
    std::map<std::string, std::uint64_t> dropped_by_node;
    std::map<std::string, std::uint64_t> refused_by_node;

    std::uint64_t admin_records() const noexcept { return crs_count + ccs_count; }
};

Metrics summarize(const EventLog& log);

/// Aligned two-column table, one metric per line.
std::string format_text(const Metrics& metrics);
/// `key=value` lines.
std::string format_kv(const Metrics& metrics);

/// Replays custody events and checks, after every group of same-time
/// events, that no bundle has more than two custodians and that a bundle
/// neither delivered nor expired still has one. Returns the violations.
std::vector<std::string> check_custody_chain(const EventLog& log);

} // namespace bprel
