#include "bprel/custody.hpp"

#include "bprel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace bprel {

namespace {

std::vector<std::uint64_t> holes_between(const std::set<std::uint64_t>& numbers) {
    std::vector<std::uint64_t> out;
    if (numbers.empty()) {
        return out;
    }
    auto it = numbers.begin();
    std::uint64_t previous = *it;
    for (++it; it != numbers.end(); ++it) {
        for (std::uint64_t n = previous + 1; n < *it; ++n) {
            out.push_back(n);
        }
        previous = *it;
    }
    return out;
}

} // namespace

std::string disposition_name(std::int64_t code) {
    switch (code) {
    case disposition::accepted: return "accepted";
    case disposition::accepted_duplicate: return "accepted-duplicate";
    case disposition::refused_dropped: return "refused-dropped";
    case disposition::refused_forwarded: return "refused-forwarded";
    default: return code > 0 ? "accepted-reserved" : "refused-reserved";
    }
}

Bytes encode_cteb(const CtebData& cteb) {
    cbor::Writer out;
    out.array(3);
    out.uint(cteb.sequence_number);
    out.uint(cteb.sequence_id);
    encode_eid(out, cteb.block_source);
    return out.take();
}

CtebData decode_cteb(ByteView bytes) {
    try {
        cbor::Reader in(bytes);
        if (in.read_definite_array() != 3) {
            throw MalformedBlock("CTEB must be an array of exactly 3 elements");
        }
        CtebData cteb;
        cteb.sequence_number = in.read_uint();
        cteb.sequence_id = in.read_uint();
        cteb.block_source = decode_eid(in);
        in.expect_end();
        return cteb;
    } catch (const MalformedBlock&) {
        throw;
    } catch (const Error& e) {
        throw MalformedBlock(std::string("malformed CTEB: ") + e.what());
    }
}

CanonicalBlock make_cteb_block(const CtebData& cteb) {
    CanonicalBlock block;
    block.type_code = block_type::cteb;
    block.crc_type = CrcType::crc32c;
    block.data = encode_cteb(cteb);
    return block;
}

std::optional<CtebData> find_cteb(const Bundle& bundle) {
    const auto blocks = bundle.blocks_of_type(block_type::cteb);
    if (blocks.size() > 1) {
        throw MalformedBundle("bundle carries more than one CTEB");
    }
    if (blocks.empty()) {
        return std::nullopt;
    }
    return decode_cteb(blocks.front()->data);
}

BundleTag cteb_tag(const CtebData& cteb, const PrimaryBlock& primary) {
    return derive_tag(cteb.sequence_id, cteb.sequence_number, cteb.block_source, primary);
}

Bytes build_ccs(const CcsSignal& signal) {
    cbor::Writer content;
    content.map(signal.entries.size());
    for (const auto& [code, tags] : signal.entries) {
        content.integer(code);
        BundleSequenceCollection collection = coalesce(tags);
        omit_all_sources(collection);
        encode_collection(content, collection);
    }
    return encode_admin_record(admin_record_type::ccs, content.data());
}

std::map<std::int64_t, BundleSequenceCollection> decode_ccs(ByteView record) {
    const AdminRecord envelope = decode_admin_record(record);
    if (envelope.type_code != admin_record_type::ccs) {
        throw MalformedSignal("not a compressed custody signal (record type " +
                              std::to_string(envelope.type_code) + ")");
    }
    try {
        cbor::Reader in(envelope.content);
        if (in.peek_major() != cbor::Major::map) {
            throw MalformedSignal("CCS content must be a CBOR map");
        }
        const std::uint64_t count = in.read_map();
        std::map<std::int64_t, BundleSequenceCollection> out;
        for (std::uint64_t i = 0; i < count; ++i) {
            const cbor::Major major = in.peek_major();
            if (major != cbor::Major::unsigned_int && major != cbor::Major::negative_int) {
                throw MalformedSignal("CCS keys must be integers");
            }
            const std::int64_t code = in.read_int();
            if (code == 0) {
                throw MalformedSignal("disposition code 0 is neither acceptance nor refusal");
            }
            if (!out.emplace(code, decode_collection(in)).second) {
                throw MalformedSignal("duplicate disposition code in CCS");
            }
        }
        in.expect_end();
        return out;
    } catch (const MalformedSignal&) {
        throw;
    } catch (const Error& e) {
        throw MalformedSignal(std::string("malformed CCS: ") + e.what());
    }
}

CcsContents parse_ccs(ByteView record, const EndpointId& receiver_admin) {
    CcsContents out;
    for (auto [code, collection] : decode_ccs(record)) {
        omit_all_sources(collection);
        out[code] = expand(collection, receiver_admin.admin());
    }
    return out;
}

const char* to_string(CustodyDecision decision) noexcept {
    switch (decision) {
    case CustodyDecision::accept: return "accept";
    case CustodyDecision::refuse_drop: return "drop";
    case CustodyDecision::refuse_forward: return "forward";
    }
    return "?";
}

CustodyDecision parse_custody_decision(std::string_view text) {
    if (text == "accept") return CustodyDecision::accept;
    if (text == "drop" || text == "refuse_drop") return CustodyDecision::refuse_drop;
    if (text == "forward" || text == "refuse_forward") return CustodyDecision::refuse_forward;
    throw ConfigError("unknown custody decision '" + std::string(text) + "'");
}

ScriptedPolicy::ScriptedPolicy(std::map<std::uint64_t, std::vector<CustodyDecision>> script,
                               CustodyDecision fallback)
    : fallback_(fallback) {
    for (auto& [number, decisions] : script) {
        script_[number] = std::deque<CustodyDecision>(decisions.begin(), decisions.end());
    }
}

CustodyDecision ScriptedPolicy::evaluate(const CustodyContext& context) {
    const auto it = script_.find(context.tag.number);
    if (it == script_.end() || it->second.empty()) {
        return fallback_;
    }
    const CustodyDecision decision = it->second.front();
    it->second.pop_front();
    return decision;
}

std::string ScriptedPolicy::describe() const {
    std::ostringstream out;
    out << "scripted(";
    bool first = true;
    for (const auto& [number, decisions] : script_) {
        out << (first ? "" : " ") << number << ":";
        first = false;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            out << (i ? "," : "") << to_string(decisions[i]);
        }
    }
    out << (first ? "" : " ") << "default:" << to_string(fallback_) << ")";
    return out.str();
}

ProbabilisticPolicy::ProbabilisticPolicy(double p_accept, double p_drop, double p_forward, std::uint64_t seed)
    : p_accept_(p_accept), p_drop_(p_drop), p_forward_(p_forward), rng_(seed) {
    if (p_accept < 0 || p_drop < 0 || p_forward < 0 || std::abs(p_accept + p_drop + p_forward - 1.0) > 1e-9) {
        throw ConfigError("custody probabilities must be non-negative and sum to 1");
    }
}

CustodyDecision ProbabilisticPolicy::evaluate(const CustodyContext&) {
    // 53 random bits mapped to [0, 1); avoids implementation-defined
    // distribution algorithms so runs replay across standard libraries.
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (u < p_accept_) {
        return CustodyDecision::accept;
    }
    return u < p_accept_ + p_drop_ ? CustodyDecision::refuse_drop : CustodyDecision::refuse_forward;
}

std::string ProbabilisticPolicy::describe() const {
    std::ostringstream out;
    out << "probabilistic(" << p_accept_ << "," << p_drop_ << "," << p_forward_ << ")";
    return out.str();
}

CustodyDecision evaluate_custody(CustodyPolicy& policy, const CustodyContext& context) {
    if (!context.local_destination && (!context.has_route || context.store_full)) {
        return CustodyDecision::refuse_drop;
    }
    const CustodyDecision decision = policy.evaluate(context);
    if (decision == CustodyDecision::accept && context.store_full) {
        return CustodyDecision::refuse_drop;
    }
    return decision;
}

const char* to_string(CustodyActionKind kind) noexcept {
    switch (kind) {
    case CustodyActionKind::released: return "released";
    case CustodyActionKind::retransmit: return "retransmit";
    case CustodyActionKind::timer_reset: return "timer-reset";
    case CustodyActionKind::duplicate_advisory: return "duplicate-advisory";
    case CustodyActionKind::unknown_tag: return "unknown-tag";
    }
    return "?";
}

CustodyManager::CustodyManager(const EndpointId& self_admin, CustodyConfig config, BundleStore& store,
                               std::unique_ptr<CustodyPolicy> policy)
    : self_admin_(self_admin.admin()),
      config_(config),
      store_(store),
      policy_(policy ? std::move(policy) : std::make_unique<AlwaysAcceptPolicy>()),
      counters_(config.sequence_max),
      drafts_(config.signal_policy) {}

std::pair<StoreKey, BundleTag> CustodyManager::request_custody(Bundle bundle, SimTime expires_at, SimTime now) {
    if (bundle.count_blocks(block_type::cteb) != 0) {
        throw DuplicateCteb("bundle already carries a CTEB");
    }
    const SequenceScope scope = config_.sequence_id
                                    ? SequenceScope::explicit_id(*config_.sequence_id)
                                    : SequenceScope::per_destination(bundle.primary.destination);
    CtebData cteb{counters_.next(scope), scope.wire_id(), self_admin_};
    bundle.add_extension(make_cteb_block(cteb));
    const BundleTag tag = cteb_tag(cteb, bundle.primary);

    const StoreKey key = store_.insert(std::move(bundle), expires_at);
    store_.add_constraint(key, RetentionConstraint::custody_accepted);
    records_[tag] = CustodyRecord{tag, key, now + timer(), now, 0, std::nullopt};
    return {key, tag};
}

BundleTag CustodyManager::accept_custody(StoreKey key, const CtebData& previous, SimTime now) {
    StoredBundle& entry = store_.at(key);
    Bundle& bundle = entry.bundle;
    const BundleTag previous_tag = cteb_tag(previous, bundle.primary);

    const SequenceScope scope = config_.sequence_id
                                    ? SequenceScope::explicit_id(*config_.sequence_id)
                                    : SequenceScope::per_destination(bundle.primary.destination);
    const CtebData fresh{counters_.next(scope), scope.wire_id(), self_admin_};
    CanonicalBlock* block = bundle.find_block(block_type::cteb);
    if (block == nullptr) {
        throw Error("accept_custody on a bundle without CTEB");
    }
    block->data = encode_cteb(fresh);
    const BundleTag tag = cteb_tag(fresh, bundle.primary);

    store_.remove_constraint(key, RetentionConstraint::custody_pending);
    store_.add_constraint(key, RetentionConstraint::custody_accepted);
    records_[tag] = CustodyRecord{tag, key, now + timer(), now, 0, std::nullopt};

    // Acceptance is signalled only once the bundle is stored under its new
    // identity.
    remember_accepted(previous_tag);
    queue(previous_tag, disposition::accepted, now);
    return tag;
}

void CustodyManager::accept_delivery(const CtebData& previous, const PrimaryBlock& primary, SimTime now) {
    const BundleTag previous_tag = cteb_tag(previous, primary);
    remember_accepted(previous_tag);
    queue(previous_tag, disposition::accepted, now);
}

void CustodyManager::refuse_custody(std::optional<StoreKey> key, const CtebData& cteb, const PrimaryBlock& primary,
                                    CustodyDecision mode, SimTime now) {
    if (key) {
        store_.remove_constraint(*key, RetentionConstraint::custody_pending);
    }
    const std::int64_t code =
        mode == CustodyDecision::refuse_forward ? disposition::refused_forwarded : disposition::refused_dropped;
    queue(cteb_tag(cteb, primary), code, now);
}

void CustodyManager::acknowledge_duplicate(const CtebData& cteb, const PrimaryBlock& primary, SimTime now) {
    queue(cteb_tag(cteb, primary), disposition::accepted_duplicate, now);
}

void CustodyManager::queue(const BundleTag& tag, std::int64_t code, SimTime now) {
    dispositions_.push_back({tag, code, tag.block_source});
    if (auto flushed = drafts_.add(tag.block_source, code, tag, now)) {
        flushed_.push_back(std::move(*flushed));
    }
}

void CustodyManager::remember_accepted(const BundleTag& tag) {
    if (!accepted_lookup_.insert(tag).second) {
        return;
    }
    accepted_order_.push_back(tag);
    while (accepted_order_.size() > config_.duplicate_memory) {
        accepted_lookup_.erase(accepted_order_.front());
        accepted_order_.pop_front();
    }
}

std::vector<CcsSignal> CustodyManager::take_flushed() { return std::exchange(flushed_, {}); }

std::vector<QueuedDisposition> CustodyManager::take_dispositions() { return std::exchange(dispositions_, {}); }

std::optional<SimTime> CustodyManager::next_deadline() const {
    std::optional<SimTime> earliest = drafts_.next_deadline();
    for (const auto& [tag, record] : records_) {
        if (!earliest || record.deadline < *earliest) {
            earliest = record.deadline;
        }
    }
    return earliest;
}

CustodyRecord* CustodyManager::record_for(StoreKey key) {
    for (auto& [tag, record] : records_) {
        if (record.key == key) {
            return &record;
        }
    }
    return nullptr;
}

void CustodyManager::note_transmission(StoreKey key, std::uint64_t next_hop, SimTime now) {
    if (CustodyRecord* record = record_for(key)) {
        record->next_hop = next_hop;
        record->last_transmission = now;
    }
}

std::optional<BundleTag> CustodyManager::drop_record(StoreKey key) {
    CustodyRecord* record = record_for(key);
    if (record == nullptr) {
        return std::nullopt;
    }
    const BundleTag tag = record->tag;
    store_.remove_constraint(key, RetentionConstraint::custody_accepted);
    records_.erase(tag);
    return tag;
}

void CustodyManager::retransmit(CustodyRecord& record, const std::string& reason, SimTime now,
                                TriggerOutcome& out) {
    record.deadline = now + timer();
    record.last_transmission = now;
    ++record.retransmit_count;
    out.retransmissions.push_back({record.key, record.tag, reason});
}

std::vector<CustodyAction> CustodyManager::process_ccs(const CcsContents& contents, SimTime now) {
    std::vector<CustodyAction> actions;
    std::set<BundleTag> mentioned;
    for (const auto& [code, tags] : contents) {
        mentioned.insert(tags.begin(), tags.end());
    }

    for (const auto& [code, tags] : contents) {
        for (const BundleTag& tag : tags) {
            const auto it = records_.find(tag);
            if (it == records_.end()) {
                actions.push_back({CustodyActionKind::unknown_tag, tag, code, 0});
                continue;
            }
            CustodyRecord& record = it->second;
            if (code > 0) {
                const StoreKey key = record.key;
                store_.remove_constraint(key, RetentionConstraint::custody_accepted);
                store_.discard(key);
                records_.erase(it);
                actions.push_back({CustodyActionKind::released, tag, code, key});
                if (code == disposition::accepted_duplicate) {
                    actions.push_back({CustodyActionKind::duplicate_advisory, tag, code, key});
                    if (config_.duplicate_backoff) {
                        timer_factor_ = std::min<std::int64_t>(timer_factor_ * 2, 8);
                    }
                }
            } else if (code == disposition::refused_forwarded) {
                record.deadline = now + timer();
                actions.push_back({CustodyActionKind::timer_reset, tag, code, record.key});
            } else {
                // -1 and reserved refusals: the bundle is gone downstream.
                TriggerOutcome out;
                retransmit(record, "refused-dropped", now, out);
                actions.push_back({CustodyActionKind::retransmit, tag, code, record.key});
            }
        }
    }

    if (config_.gap_retransmit) {
        // Holes inside a run of acceptances for our own per-destination
        // sequences are presumed lost.
        std::map<SequenceScope, std::set<std::uint64_t>> accepted;
        for (const auto& [code, tags] : contents) {
            if (code <= 0) {
                continue;
            }
            for (const BundleTag& tag : tags) {
                if (tag.scope.is_per_destination() && tag.block_source == self_admin_) {
                    accepted[tag.scope].insert(tag.number);
                }
            }
        }
        trigger::GapDetected gaps;
        for (const auto& [scope, numbers] : accepted) {
            for (const std::uint64_t missing : holes_between(numbers)) {
                const BundleTag tag{scope, missing, self_admin_};
                if (!mentioned.contains(tag) && records_.contains(tag)) {
                    gaps.tags.push_back(tag);
                }
            }
        }
        if (!gaps.tags.empty()) {
            for (const Retransmission& r : on_retransmission_trigger(gaps, now).retransmissions) {
                actions.push_back({CustodyActionKind::retransmit, r.tag, 0, r.key});
            }
        }
    }
    return actions;
}

TriggerOutcome CustodyManager::on_retransmission_trigger(const RetransmissionTrigger& trigger, SimTime now) {
    TriggerOutcome out;
    auto by_tags = [&](const std::vector<BundleTag>& tags, const char* reason) {
        for (const BundleTag& tag : tags) {
            const auto it = records_.find(tag);
            if (it == records_.end()) {
                out.ignored.push_back(tag);
            } else {
                retransmit(it->second, reason, now, out);
            }
        }
    };
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, trigger::TimerExpiry>) {
                for (auto& [tag, record] : records_) {
                    if (record.deadline <= now) {
                        retransmit(record, "timer", now, out);
                    }
                }
            } else if constexpr (std::is_same_v<T, trigger::ContactStart>) {
                if (!config_.retransmit_on_contact) {
                    return;
                }
                for (auto& [tag, record] : records_) {
                    if (record.next_hop == t.peer_node) {
                        retransmit(record, "contact-start", now, out);
                    }
                }
            } else if constexpr (std::is_same_v<T, trigger::ExplicitCommand>) {
                by_tags(t.tags, "command");
            } else if constexpr (std::is_same_v<T, trigger::ForwardingFailure>) {
                by_tags({t.tag}, "forwarding-failure");
            } else {
                by_tags(t.tags, "gap");
            }
        },
        trigger);
    return out;
}

} // namespace bprel
