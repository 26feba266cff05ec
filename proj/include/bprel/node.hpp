#pragma once

// The bundle protocol agent of one simulated node: reception pipeline,
// static next-hop routing gated by link state, storage with retention
// constraints, local delivery, and dispatch of compressed reporting and
// custody signals.

#include "bprel/bundle.hpp"
#include "bprel/custody.hpp"
#include "bprel/event_log.hpp"
#include "bprel/reporting.hpp"
#include "bprel/store.hpp"

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bprel {

/// Custody policy as configuration; the node instantiates it.
struct CustodyPolicySpec {
    enum class Kind { always_accept, scripted, probabilistic };

    Kind kind = Kind::always_accept;
    std::map<std::uint64_t, std::vector<CustodyDecision>> script;
    CustodyDecision fallback = CustodyDecision::accept;
    double p_accept = 1.0;
    double p_drop = 0.0;
    double p_forward = 0.0;

    std::unique_ptr<CustodyPolicy> instantiate(std::uint64_t seed) const;
};

/// Operator-configurable node parameters.
struct Mib {
    FlushPolicy crs{100, Duration::from_seconds(10.0)};
    FlushPolicy ccs{100, Duration::from_seconds(10.0)};
    Duration retransmission_timer = Duration::from_seconds(30.0);
    std::uint64_t sequence_max = kDefaultSequenceMax;
    /// Sequence IDs this node stamps into CREBs / CTEBs; nullopt selects
    /// per-destination sequences.
    std::optional<std::uint64_t> creb_sequence_id;
    std::optional<std::uint64_t> cteb_sequence_id;
    CustodyPolicySpec custody_policy;
    bool duplicate_backoff = false;
    bool gap_retransmit = false;
    bool retransmit_on_contact = false;
    std::size_t duplicate_memory = 1U << 16;
    std::optional<std::size_t> store_capacity;
    Duration admin_lifetime = Duration::from_seconds(3600.0);
};

struct NodeConfig {
    std::string name;
    /// Node number; the administrative EID is ipn:<node>.0.
    std::uint64_t node = 0;
    /// Destination node number to next-hop node number. Neighbours are
    /// reachable without an entry.
    std::map<std::uint64_t, std::uint64_t> routes;
    std::optional<std::uint64_t> default_route;
    Mib mib;

    EndpointId admin_eid() const noexcept { return {node, 0}; }
};

struct CrebRequest {
    ReportTypes types;
    std::optional<EndpointId> report_to;
};

struct AduOptions {
    std::optional<CrebRequest> creb;
    bool custody = false;
    Duration lifetime = Duration::from_seconds(3600.0);
};

/// One bundle handed to the convergence layer toward a neighbour.
struct Transmission {
    std::uint64_t next_hop = 0;
    Bytes bytes;
    BundleId id;
    bool admin = false;
    /// CREB/CTEB tags carried, for scripted loss matching and logging.
    std::vector<BundleTag> tags;
};

class Node {
public:
    /// `seed` feeds the probabilistic custody policy, if any.
    Node(NodeConfig config, std::uint64_t seed, EventLog& log);

    const NodeConfig& config() const noexcept { return config_; }
    const std::string& name() const noexcept { return config_.name; }
    EndpointId admin_eid() const noexcept { return config_.admin_eid(); }

    /// Declares a neighbour and whether its link is currently up, without
    /// logging or triggers.
    void add_neighbour(std::uint64_t node, bool up);

    std::vector<Transmission> on_receive(ByteView bytes, std::uint64_t from_node, SimTime now);
    std::vector<Transmission> on_timer(SimTime now);
    std::vector<Transmission> on_contact(std::uint64_t peer, bool up, SimTime now);
    /// Originates an ADU from a local client. Throws Error if the source
    /// client is not on this node.
    std::vector<Transmission> send_adu(const EndpointId& source_client, const EndpointId& dest_client,
                                       ByteView payload, const AduOptions& options, SimTime now);
    /// Retransmits the named bundles under this node's custody.
    std::vector<Transmission> retransmit_command(const std::vector<BundleTag>& tags, SimTime now);
    /// Convergence-layer report that a transmission of a custody bundle failed.
    std::vector<Transmission> forwarding_failure(const BundleTag& tag, SimTime now);

    std::optional<SimTime> next_wakeup() const;

    /// Store accounting: ACCEPTED-constrained bundles equal live custody
    /// records, and every record points at a stored bundle. Returns a
    /// description of the first violation.
    std::optional<std::string> check_invariants() const;

    /// Store contents, drafts, custody records and counters as text.
    std::string dump_state() const;

    const BundleStore& store() const noexcept { return store_; }
    const CustodyManager& custody() const noexcept { return custody_; }
    const ReportingAgent& reporting() const noexcept { return reporting_; }
    const SequenceCounterTable& creb_counters() const noexcept { return creb_counters_; }

private:
    enum class Reception { consumed, keep };

    void log(SimTime now, std::string_view kind, std::string_view tag, const std::string& detail);
    std::optional<std::uint64_t> next_hop(std::uint64_t destination_node) const;
    bool link_up(std::uint64_t peer) const;

    void process_bundle(StoreKey key, SimTime now, std::vector<Transmission>& out);
    bool handle_custody(StoreKey key, const CtebData& cteb, bool local, SimTime now, std::vector<Transmission>& out);
    void deliver(StoreKey key, SimTime now, std::vector<Transmission>& out);
    void delete_bundle(StoreKey key, std::string_view reason, SimTime now, std::vector<Transmission>& out);
    void forward(StoreKey key, SimTime now, std::vector<Transmission>& out, std::string_view why = "route");
    void transmit(StoreKey key, std::uint64_t hop, SimTime now, std::vector<Transmission>& out);
    void report(StoreKey key, ReportReason reason, SimTime now, std::vector<Transmission>& out);
    void handle_admin_record(const Bundle& bundle, SimTime now, std::vector<Transmission>& out);
    void send_crs(const CrsSignal& signal, SimTime now, std::vector<Transmission>& out);
    void send_ccs(const CcsSignal& signal, SimTime now, std::vector<Transmission>& out);
    void send_admin(const EndpointId& destination, const Bytes& record, SimTime now, std::vector<Transmission>& out);
    void drain_custody(SimTime now, std::vector<Transmission>& out);
    void run_retransmissions(const TriggerOutcome& outcome, SimTime now, std::vector<Transmission>& out);
    std::vector<BundleTag> tags_of(const Bundle& bundle) const;
    std::string bundle_label(StoreKey key) const;

    NodeConfig config_;
    EventLog& log_;
    BundleStore store_;
    SequenceCounterTable creb_counters_;
    ReportingAgent reporting_;
    CustodyManager custody_;
    std::map<std::uint64_t, bool> neighbours_;
    std::map<std::uint64_t, std::deque<StoreKey>> waiting_;
    std::uint64_t creation_sequence_ = 0;
    /// Delivery tags reported back to this node, per scope, for gap checks.
    std::map<SequenceScope, std::set<std::uint64_t>> delivered_reports_;
};

} // namespace bprel
