#pragma once

// Compressed Custody Signalling: the Custody Transfer Extension Block
// (CTEB), Compressed Custody Signals (CCS), custody policies and the
// per-node custody manager.

#include "bprel/admin_record.hpp"
#include "bprel/bundle.hpp"
#include "bprel/sequence_collection.hpp"
#include "bprel/signal_draft.hpp"
#include "bprel/store.hpp"

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <variant>
#include <vector>

namespace bprel {

/// Positive codes accept custody, negative codes refuse it. Codes beyond
/// +/-2 are reserved but survive decoding.
namespace disposition {
inline constexpr std::int64_t accepted = 1;
inline constexpr std::int64_t accepted_duplicate = 2;
inline constexpr std::int64_t refused_dropped = -1;
inline constexpr std::int64_t refused_forwarded = -2;
} // namespace disposition

std::string disposition_name(std::int64_t code);

/// All three fields are mandatory; there is no report endpoint.
struct CtebData {
    std::uint64_t sequence_number = 0;
    /// 0 selects the per-destination sequence.
    std::uint64_t sequence_id = 0;
    EndpointId block_source;

    friend bool operator==(const CtebData&, const CtebData&) = default;
};

Bytes encode_cteb(const CtebData& cteb);
/// Throws MalformedBlock.
CtebData decode_cteb(ByteView bytes);
CanonicalBlock make_cteb_block(const CtebData& cteb);
/// Throws MalformedBundle when the bundle carries more than one CTEB.
std::optional<CtebData> find_cteb(const Bundle& bundle);
BundleTag cteb_tag(const CtebData& cteb, const PrimaryBlock& primary);

using CcsSignal = FlushedSignal<std::int64_t>;
using CcsContents = std::map<std::int64_t, std::set<BundleTag>>;

/// `[65, {code: collection}]`, keys ascending, block sources always
/// omitted.
Bytes build_ccs(const CcsSignal& signal);
std::map<std::int64_t, BundleSequenceCollection> decode_ccs(ByteView record);
/// Fills every block source with `receiver_admin`. Throws MalformedSignal
/// on non-map content, non-integer keys or key 0.
CcsContents parse_ccs(ByteView record, const EndpointId& receiver_admin);

enum class CustodyDecision { accept, refuse_drop, refuse_forward };

const char* to_string(CustodyDecision decision) noexcept;
CustodyDecision parse_custody_decision(std::string_view text);

/// What a node knows when it evaluates custody for an incoming bundle.
struct CustodyContext {
    BundleTag tag;
    bool local_destination = false;
    bool has_route = true;
    bool store_full = false;
};

class CustodyPolicy {
public:
    virtual ~CustodyPolicy() = default;
    virtual CustodyDecision evaluate(const CustodyContext& context) = 0;
    virtual std::string describe() const = 0;
};

class AlwaysAcceptPolicy final : public CustodyPolicy {
public:
    CustodyDecision evaluate(const CustodyContext&) override { return CustodyDecision::accept; }
    std::string describe() const override { return "accept"; }
};

/// Explicit decisions per sequence number of the incoming tag, consumed in
/// order on successive evaluations; `fallback` once a list is exhausted.
class ScriptedPolicy final : public CustodyPolicy {
public:
    ScriptedPolicy(std::map<std::uint64_t, std::vector<CustodyDecision>> script, CustodyDecision fallback);
    CustodyDecision evaluate(const CustodyContext& context) override;
    std::string describe() const override;

private:
    std::map<std::uint64_t, std::deque<CustodyDecision>> script_;
    CustodyDecision fallback_;
};

/// Independent draw per evaluation with the given branch probabilities.
class ProbabilisticPolicy final : public CustodyPolicy {
public:
    /// Throws ConfigError unless the probabilities are non-negative and sum
    /// to 1.
    ProbabilisticPolicy(double p_accept, double p_drop, double p_forward, std::uint64_t seed);
    CustodyDecision evaluate(const CustodyContext& context) override;
    std::string describe() const override;

private:
    double p_accept_;
    double p_drop_;
    double p_forward_;
    std::mt19937_64 rng_;
};

/// Wraps a policy with the resource checks every node applies: no route or
/// a full store refuses by dropping.
CustodyDecision evaluate_custody(CustodyPolicy& policy, const CustodyContext& context);

struct CustodyConfig {
    Duration retransmission_timer = Duration::from_seconds(30.0);
    FlushPolicy signal_policy{100, Duration::from_seconds(10.0)};
    /// Sequence ID for CTEBs this node stamps; nullopt uses per-destination
    /// sequences.
    std::optional<std::uint64_t> sequence_id;
    std::uint64_t sequence_max = kDefaultSequenceMax;
    /// Doubles the retransmission timer (up to 8x) on duplicate-acceptance
    /// signals.
    bool duplicate_backoff = false;
    /// Retransmits holes inside a run of acceptances before their timer.
    bool gap_retransmit = false;
    /// Retransmits bundles routed over a link when its contact starts.
    bool retransmit_on_contact = false;
    std::size_t duplicate_memory = 1U << 16;
};

struct CustodyRecord {
    BundleTag tag;
    StoreKey key = 0;
    SimTime deadline;
    SimTime last_transmission;
    std::uint64_t retransmit_count = 0;
    /// Node number of the next hop used for the last transmission.
    std::optional<std::uint64_t> next_hop;
};

struct QueuedDisposition {
    BundleTag tag;
    std::int64_t code = 0;
    EndpointId destination;
};

struct Retransmission {
    StoreKey key = 0;
    BundleTag tag;
    std::string reason;
};

enum class CustodyActionKind { released, retransmit, timer_reset, duplicate_advisory, unknown_tag };

const char* to_string(CustodyActionKind kind) noexcept;

struct CustodyAction {
    CustodyActionKind kind;
    BundleTag tag;
    std::int64_t code = 0;
    /// Store entry concerned; 0 for unknown tags.
    StoreKey key = 0;
};

namespace trigger {
struct TimerExpiry {};
struct ContactStart {
    std::uint64_t peer_node = 0;
};
struct ExplicitCommand {
    std::vector<BundleTag> tags;
};
struct ForwardingFailure {
    BundleTag tag;
};
struct GapDetected {
    std::vector<BundleTag> tags;
};
} // namespace trigger

using RetransmissionTrigger = std::variant<trigger::TimerExpiry, trigger::ContactStart, trigger::ExplicitCommand,
                                           trigger::ForwardingFailure, trigger::GapDetected>;

struct TriggerOutcome {
    std::vector<Retransmission> retransmissions;
    /// Named tags with no live custody record.
    std::vector<BundleTag> ignored;
};

/// Custody state of one node: records for bundles it is custodian of, the
/// recently-accepted set used for duplicate detection, and pending CCS
/// drafts. The owning node serialises all calls.
class CustodyManager {
public:
    CustodyManager(const EndpointId& self_admin, CustodyConfig config, BundleStore& store,
                   std::unique_ptr<CustodyPolicy> policy);

    /// Inserts a fresh CTEB into a bundle that has none, stores it with
    /// COMPRESSED_CUSTODY_ACCEPTED and starts its retransmission timer.
    /// Throws DuplicateCteb.
    std::pair<StoreKey, BundleTag> request_custody(Bundle bundle, SimTime expires_at, SimTime now);

    CustodyDecision evaluate(const CustodyContext& context) { return evaluate_custody(*policy_, context); }

    bool is_duplicate(const BundleTag& previous_tag) const { return accepted_lookup_.contains(previous_tag); }

    /// Replaces the CTEB of a stored bundle (held under PENDING) with this
    /// node's own, moves PENDING to ACCEPTED and queues an acceptance for
    /// the previous custodian. Returns the new tag.
    BundleTag accept_custody(StoreKey key, const CtebData& previous, SimTime now);
    /// Acceptance by the final destination: the bundle is delivered, so no
    /// record or replacement CTEB is kept.
    void accept_delivery(const CtebData& previous, const PrimaryBlock& primary, SimTime now);
    /// Queues -1 or -2 toward the current custodian and clears PENDING.
    void refuse_custody(std::optional<StoreKey> key, const CtebData& cteb, const PrimaryBlock& primary,
                        CustodyDecision mode, SimTime now);
    /// Queues a duplicate acceptance (code 2).
    void acknowledge_duplicate(const CtebData& cteb, const PrimaryBlock& primary, SimTime now);

    /// Applies a CCS addressed to this node.
    std::vector<CustodyAction> process_ccs(const CcsContents& contents, SimTime now);

    TriggerOutcome on_retransmission_trigger(const RetransmissionTrigger& trigger, SimTime now);

    /// Records the next hop and time of a (re)transmission.
    void note_transmission(StoreKey key, std::uint64_t next_hop, SimTime now);

    /// Drops the record for a bundle whose lifetime expired.
    std::optional<BundleTag> drop_record(StoreKey key);

    std::vector<CcsSignal> poll_flush(SimTime now) { return drafts_.poll(now); }
    std::vector<CcsSignal> take_flushed();
    std::optional<SimTime> next_deadline() const;

    const std::map<BundleTag, CustodyRecord>& records() const noexcept { return records_; }
    const DraftTable<std::int64_t>& drafts() const noexcept { return drafts_; }
    const std::vector<QueuedDisposition>& dispositions() const noexcept { return dispositions_; }
    std::vector<QueuedDisposition> take_dispositions();
    const CustodyConfig& config() const noexcept { return config_; }
    const SequenceCounterTable& counters() const noexcept { return counters_; }
    std::int64_t timer_factor() const noexcept { return timer_factor_; }
    const CustodyPolicy& policy() const noexcept { return *policy_; }

private:
    void queue(const BundleTag& tag, std::int64_t code, SimTime now);
    void remember_accepted(const BundleTag& tag);
    Duration timer() const { return config_.retransmission_timer * timer_factor_; }
    void retransmit(CustodyRecord& record, const std::string& reason, SimTime now, TriggerOutcome& out);
    CustodyRecord* record_for(StoreKey key);

    EndpointId self_admin_;
    CustodyConfig config_;
    BundleStore& store_;
    std::unique_ptr<CustodyPolicy> policy_;
    SequenceCounterTable counters_;
    std::map<BundleTag, CustodyRecord> records_;
    std::deque<BundleTag> accepted_order_;
    std::set<BundleTag> accepted_lookup_;
    DraftTable<std::int64_t> drafts_;
    std::vector<CcsSignal> flushed_;
    std::vector<QueuedDisposition> dispositions_;
    std::int64_t timer_factor_ = 1;
};

} // namespace bprel
