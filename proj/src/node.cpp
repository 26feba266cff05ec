#include "bprel/node.hpp"

#include "bprel/errors.hpp"

#include <algorithm>
#include <sstream>

namespace bprel {

namespace {

std::string sanitize(std::string_view text) {
    std::string out(text);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n'; }, '_');
    return out;
}

std::string first_tag(const std::vector<BundleTag>& tags) { return tags.empty() ? "-" : tags.front().str(); }

CustodyConfig custody_config(const Mib& mib) {
    CustodyConfig config;
    config.retransmission_timer = mib.retransmission_timer;
    config.signal_policy = mib.ccs;
    config.sequence_id = mib.cteb_sequence_id;
    config.sequence_max = mib.sequence_max;
    config.duplicate_backoff = mib.duplicate_backoff;
    config.gap_retransmit = mib.gap_retransmit;
    config.retransmit_on_contact = mib.retransmit_on_contact;
    config.duplicate_memory = mib.duplicate_memory;
    return config;
}

} // namespace

std::unique_ptr<CustodyPolicy> CustodyPolicySpec::instantiate(std::uint64_t seed) const {
    switch (kind) {
    case Kind::always_accept: return std::make_unique<AlwaysAcceptPolicy>();
    case Kind::scripted: return std::make_unique<ScriptedPolicy>(script, fallback);
    case Kind::probabilistic: return std::make_unique<ProbabilisticPolicy>(p_accept, p_drop, p_forward, seed);
    }
    throw ConfigError("unknown custody policy kind");
}

Node::Node(NodeConfig config, std::uint64_t seed, EventLog& log)
    : config_(std::move(config)),
      log_(log),
      store_(config_.mib.store_capacity),
      creb_counters_(config_.mib.sequence_max),
      reporting_(config_.admin_eid(), config_.mib.crs),
      custody_(config_.admin_eid(), custody_config(config_.mib), store_, config_.mib.custody_policy.instantiate(seed)) {
    if (config_.node == 0) {
        throw ConfigError("node '" + config_.name + "' needs a non-zero node number");
    }
}

void Node::add_neighbour(std::uint64_t node, bool up) { neighbours_[node] = up; }

void Node::log(SimTime now, std::string_view kind, std::string_view tag, const std::string& detail) {
    log_.add({now, config_.name, std::string(kind), std::string(tag), detail});
}

std::optional<std::uint64_t> Node::next_hop(std::uint64_t destination_node) const {
    if (const auto it = config_.routes.find(destination_node); it != config_.routes.end()) {
        return it->second;
    }
    if (neighbours_.contains(destination_node)) {
        return destination_node;
    }
    return config_.default_route;
}

bool Node::link_up(std::uint64_t peer) const {
    const auto it = neighbours_.find(peer);
    return it != neighbours_.end() && it->second;
}

std::vector<BundleTag> Node::tags_of(const Bundle& bundle) const {
    std::vector<BundleTag> tags;
    try {
        if (const auto cteb = find_cteb(bundle)) {
            tags.push_back(cteb_tag(*cteb, bundle.primary));
        }
        for (const ResolvedCreb& creb : resolved_crebs(bundle)) {
            tags.push_back(creb.tag);
        }
    } catch (const Error&) {
        // Unreadable extension blocks carry no usable identity.
    }
    return tags;
}

std::string Node::bundle_label(StoreKey key) const {
    const StoredBundle* entry = store_.find(key);
    return entry ? entry->bundle.id().str() : "?";
}

std::vector<Transmission> Node::send_adu(const EndpointId& source_client, const EndpointId& dest_client,
                                         ByteView payload, const AduOptions& options, SimTime now) {
    if (source_client.node != config_.node) {
        throw Error(source_client.str() + " is not a client of node " + config_.name);
    }
    std::vector<Transmission> out;

    PrimaryBlock primary;
    primary.destination = dest_client;
    primary.source = source_client;
    primary.creation_time_ms = now.millis();
    primary.creation_sequence = creation_sequence_++;
    primary.lifetime_ms = static_cast<std::uint64_t>(options.lifetime.micros / 1000);
    Bundle bundle = make_bundle(primary, payload);

    if (options.creb) {
        const SequenceScope scope = config_.mib.creb_sequence_id
                                        ? SequenceScope::explicit_id(*config_.mib.creb_sequence_id)
                                        : SequenceScope::per_destination(dest_client);
        CrebData creb;
        creb.sequence_number = creb_counters_.next(scope);
        creb.sequence_id = scope.wire_id();
        creb.report_types = options.creb->types;
        // The block source may be left out because this node is the source.
        if (options.creb->report_to) {
            creb.block_source = admin_eid();
            creb.report_endpoint = options.creb->report_to;
        }
        bundle.add_extension(make_creb_block(creb));
    }

    const SimTime expires_at = now + options.lifetime;
    StoreKey key = 0;
    std::string custody_tag;
    if (options.custody) {
        const auto [stored, tag] = custody_.request_custody(std::move(bundle), expires_at, now);
        key = stored;
        custody_tag = tag.str();
    } else {
        key = store_.insert(std::move(bundle), expires_at);
    }

    const Bundle& stored = store_.at(key).bundle;
    log(now, "adu-send", first_tag(tags_of(stored)),
        Detail()
            .add("bundle", stored.id().str())
            .add("dest", dest_client.str())
            .add("custody", options.custody ? 1 : 0)
            .add("creb", options.creb ? options.creb->types.str() : "none"));
    if (options.custody) {
        log(now, "custody-request", custody_tag, Detail().add("bundle", stored.id().str()));
    }

    forward(key, now, out);
    store_.discard(key);
    drain_custody(now, out);
    return out;
}

std::vector<Transmission> Node::on_receive(ByteView bytes, std::uint64_t from_node, SimTime now) {
    std::vector<Transmission> out;
    Bundle bundle;
    try {
        bundle = decode_bundle(bytes);
    } catch (const Error& e) {
        log(now, "malformed", "-", Detail().add("from", from_node).add("error", sanitize(e.what())));
        return out;
    }

    const std::vector<BundleTag> tags = tags_of(bundle);
    log(now, "receive", first_tag(tags),
        Detail()
            .add("bundle", bundle.id().str())
            .add("from", from_node)
            .add("admin", bundle.primary.is_admin_record() ? 1 : 0));

    const SimTime expires_at =
        SimTime::from_micros(static_cast<std::int64_t>((bundle.primary.creation_time_ms + bundle.primary.lifetime_ms) * 1000));
    if (expires_at <= now) {
        log(now, "delete", first_tag(tags), Detail().add("bundle", bundle.id().str()).add("reason", "lifetime-expired"));
        return out;
    }

    StoreKey key = 0;
    try {
        key = store_.insert(bundle, expires_at);
    } catch (const StoreFull&) {
        const RecordOutcome outcome = reporting_.record_event(bundle, ReportReason::deletion, now);
        for (const RecordedReport& r : outcome.recorded) {
            log(now, "report-queued", r.tag.str(),
                Detail().add("reason", to_string(r.reason)).add("dest", r.destination.str()));
        }
        for (const CrsSignal& signal : outcome.flushed) {
            send_crs(signal, now, out);
        }
        if (const auto cteb = find_cteb(bundle)) {
            custody_.refuse_custody(std::nullopt, *cteb, bundle.primary, CustodyDecision::refuse_drop, now);
        }
        log(now, "delete", first_tag(tags), Detail().add("bundle", bundle.id().str()).add("reason", "store-full"));
        drain_custody(now, out);
        return out;
    }

    process_bundle(key, now, out);
    store_.discard(key);
    drain_custody(now, out);
    return out;
}

void Node::process_bundle(StoreKey key, SimTime now, std::vector<Transmission>& out) {
    const Bundle& bundle = store_.at(key).bundle;
    const bool local = bundle.primary.destination.node == config_.node;

    if (bundle.primary.is_admin_record()) {
        if (local) {
            handle_admin_record(bundle, now, out);
            store_.expire(key);
        } else {
            forward(key, now, out);
        }
        return;
    }

    report(key, ReportReason::reception, now, out);

    std::optional<CtebData> cteb;
    try {
        cteb = find_cteb(store_.at(key).bundle);
    } catch (const Error& e) {
        log(now, "malformed", "-", Detail().add("bundle", bundle_label(key)).add("error", sanitize(e.what())));
        delete_bundle(key, "malformed-cteb", now, out);
        return;
    }
    if (cteb) {
        handle_custody(key, *cteb, local, now, out);
    } else if (local) {
        deliver(key, now, out);
    } else {
        forward(key, now, out);
    }
}

bool Node::handle_custody(StoreKey key, const CtebData& cteb, bool local, SimTime now,
                          std::vector<Transmission>& out) {
    const PrimaryBlock primary = store_.at(key).bundle.primary;
    const std::string label = bundle_label(key);
    const BundleTag previous = cteb_tag(cteb, primary);

    if (custody_.is_duplicate(previous)) {
        custody_.acknowledge_duplicate(cteb, primary, now);
        log(now, "custody-duplicate", previous.str(), Detail().add("bundle", label));
        return true;
    }

    store_.add_constraint(key, RetentionConstraint::custody_pending);
    CustodyContext context;
    context.tag = previous;
    context.local_destination = local;
    context.has_route = local || next_hop(primary.destination.node).has_value();
    context.store_full = store_.full();
    const CustodyDecision decision = custody_.evaluate(context);

    switch (decision) {
    case CustodyDecision::accept:
        if (local) {
            custody_.accept_delivery(cteb, primary, now);
            store_.remove_constraint(key, RetentionConstraint::custody_pending);
            log(now, "custody-accept", previous.str(),
                Detail().add("prev", previous.str()).add("bundle", label).add("final", 1));
            deliver(key, now, out);
        } else {
            const BundleTag fresh = custody_.accept_custody(key, cteb, now);
            log(now, "custody-accept", fresh.str(),
                Detail().add("prev", previous.str()).add("bundle", label).add("final", 0));
            forward(key, now, out, "custody");
        }
        break;
    case CustodyDecision::refuse_drop:
        custody_.refuse_custody(key, cteb, primary, decision, now);
        log(now, "custody-refuse", previous.str(),
            Detail().add("code", disposition::refused_dropped).add("bundle", label));
        delete_bundle(key, "custody-refused", now, out);
        break;
    case CustodyDecision::refuse_forward:
        custody_.refuse_custody(key, cteb, primary, decision, now);
        log(now, "custody-refuse", previous.str(),
            Detail().add("code", disposition::refused_forwarded).add("bundle", label));
        if (local) {
            deliver(key, now, out);
        } else {
            forward(key, now, out);
        }
        break;
    }
    return true;
}

void Node::deliver(StoreKey key, SimTime now, std::vector<Transmission>& out) {
    const Bundle& bundle = store_.at(key).bundle;
    log(now, "deliver", first_tag(tags_of(bundle)),
        Detail().add("bundle", bundle.id().str()).add("client", bundle.primary.destination.str()));
    report(key, ReportReason::delivery, now, out);
}

void Node::delete_bundle(StoreKey key, std::string_view reason, SimTime now, std::vector<Transmission>& out) {
    const StoredBundle* entry = store_.find(key);
    if (entry == nullptr) {
        return;
    }
    const bool admin = entry->bundle.primary.is_admin_record();
    if (!admin) {
        report(key, ReportReason::deletion, now, out);
    }
    log(now, "delete", first_tag(tags_of(entry->bundle)),
        Detail().add("bundle", entry->bundle.id().str()).add("reason", reason).add("admin", admin ? 1 : 0));
    if (const auto tag = custody_.drop_record(key)) {
        log(now, "custody-abandon", tag->str(), Detail().add("bundle", bundle_label(key)).add("reason", reason));
    }
    for (auto& [peer, queue] : waiting_) {
        std::erase(queue, key);
    }
    store_.expire(key);
}

void Node::forward(StoreKey key, SimTime now, std::vector<Transmission>& out, std::string_view why) {
    const StoredBundle& entry = store_.at(key);
    const std::uint64_t destination = entry.bundle.primary.destination.node;
    const auto hop = next_hop(destination);
    if (!hop || *hop == config_.node) {
        delete_bundle(key, "no-route", now, out);
        return;
    }
    if (!link_up(*hop)) {
        if (!store_.has_constraint(key, RetentionConstraint::forward_pending)) {
            store_.add_constraint(key, RetentionConstraint::forward_pending);
            waiting_[*hop].push_back(key);
            log(now, "forward-wait", first_tag(tags_of(entry.bundle)),
                Detail().add("bundle", entry.bundle.id().str()).add("to", *hop));
        }
        return;
    }
    (void)why;
    transmit(key, *hop, now, out);
}

void Node::transmit(StoreKey key, std::uint64_t hop, SimTime now, std::vector<Transmission>& out) {
    const Bundle& bundle = store_.at(key).bundle;
    Transmission tx;
    tx.next_hop = hop;
    tx.bytes = encode_bundle(bundle);
    tx.id = bundle.id();
    tx.admin = bundle.primary.is_admin_record();
    tx.tags = tags_of(bundle);
    log(now, "forward", first_tag(tx.tags),
        Detail().add("bundle", tx.id.str()).add("to", hop).add("admin", tx.admin ? 1 : 0));
    out.push_back(std::move(tx));
    custody_.note_transmission(key, hop, now);
    if (!bundle.primary.is_admin_record()) {
        report(key, ReportReason::forwarding, now, out);
    }
}

void Node::report(StoreKey key, ReportReason reason, SimTime now, std::vector<Transmission>& out) {
    RecordOutcome outcome;
    try {
        outcome = reporting_.record_event(store_.at(key).bundle, reason, now);
    } catch (const Error& e) {
        log(now, "malformed", "-", Detail().add("bundle", bundle_label(key)).add("error", sanitize(e.what())));
        return;
    }
    for (const RecordedReport& r : outcome.recorded) {
        log(now, "report-queued", r.tag.str(),
            Detail().add("reason", to_string(r.reason)).add("dest", r.destination.str()).add("bundle", bundle_label(key)));
    }
    for (const CrsSignal& signal : outcome.flushed) {
        send_crs(signal, now, out);
    }
}

void Node::handle_admin_record(const Bundle& bundle, SimTime now, std::vector<Transmission>& out) {
    const Bytes& payload = bundle.payload().data;
    const std::string from = bundle.primary.source.str();
    try {
        const AdminRecord record = decode_admin_record(payload);
        if (record.type_code == admin_record_type::crs) {
            const CrsContents contents = parse_crs(payload, admin_eid());
            std::size_t count = 0;
            for (const auto& [reason, tags] : contents) {
                count += tags.size();
            }
            log(now, "crs-receive", "-",
                Detail().add("from", from).add("bundles", std::uint64_t{count}).add("record", to_hex(payload)));

            const auto delivered = contents.find(static_cast<std::uint64_t>(ReportReason::delivery));
            if (delivered == contents.end()) {
                return;
            }
            std::set<SequenceScope> touched;
            for (const BundleTag& tag : delivered->second) {
                if (tag.block_source == admin_eid()) {
                    delivered_reports_[tag.scope].insert(tag.number);
                    touched.insert(tag.scope);
                }
            }
            for (const SequenceScope& scope : touched) {
                const auto& numbers = delivered_reports_[scope];
                std::set<BundleTag> reported;
                for (const std::uint64_t n : numbers) {
                    reported.insert({scope, n, admin_eid()});
                }
                const auto missing = detect_gaps(reported, scope, 0, *numbers.rbegin());
                if (missing.empty()) {
                    continue;
                }
                std::string list;
                for (const std::uint64_t n : missing) {
                    list += (list.empty() ? "" : ",") + std::to_string(n);
                }
                log(now, "gap-detected", scope.str(), Detail().add("missing", list));
            }
        } else if (record.type_code == admin_record_type::ccs) {
            const CcsContents contents = parse_ccs(payload, admin_eid());
            std::size_t count = 0;
            std::map<BundleTag, std::string> labels;
            for (const auto& [code, tags] : contents) {
                count += tags.size();
                for (const BundleTag& tag : tags) {
                    if (const auto it = custody_.records().find(tag); it != custody_.records().end()) {
                        labels[tag] = bundle_label(it->second.key);
                    }
                }
            }
            log(now, "ccs-receive", "-",
                Detail().add("from", from).add("bundles", std::uint64_t{count}).add("record", to_hex(payload)));
            for (const CustodyAction& action : custody_.process_ccs(contents, now)) {
                const std::string label = labels.contains(action.tag) ? labels[action.tag] : "?";
                switch (action.kind) {
                case CustodyActionKind::released:
                    log(now, "custody-release", action.tag.str(), Detail().add("code", action.code).add("bundle", label));
                    break;
                case CustodyActionKind::retransmit: {
                    const auto record = custody_.records().find(action.tag);
                    log(now, "custody-retransmit", action.tag.str(),
                        Detail()
                            .add("reason", action.code == 0 ? "gap" : "refused-dropped")
                            .add("count", record != custody_.records().end() ? record->second.retransmit_count : 0)
                            .add("bundle", label));
                    if (store_.find(action.key) != nullptr) {
                        forward(action.key, now, out);
                    }
                    break;
                }
                case CustodyActionKind::timer_reset:
                    log(now, "custody-timer-reset", action.tag.str(), Detail().add("bundle", label));
                    break;
                case CustodyActionKind::duplicate_advisory:
                    log(now, "custody-advisory", action.tag.str(),
                        Detail().add("bundle", label).add("timer-factor", custody_.timer_factor()));
                    break;
                case CustodyActionKind::unknown_tag:
                    log(now, "unknown-tag", action.tag.str(), Detail().add("code", action.code));
                    break;
                }
            }
        } else {
            log(now, "admin-unknown", "-", Detail().add("from", from).add("type", record.type_code));
        }
    } catch (const Error& e) {
        log(now, "malformed", "-", Detail().add("from", from).add("error", sanitize(e.what())));
    }
}

void Node::send_crs(const CrsSignal& signal, SimTime now, std::vector<Transmission>& out) {
    const Bytes record = build_crs(signal);
    log(now, "crs-send", "-",
        Detail()
            .add("dest", signal.destination.str())
            .add("created", signal.created_at)
            .add("trigger", to_string(signal.trigger))
            .add("bundles", std::uint64_t{signal.distinct_tags()})
            .add("record", to_hex(record)));
    send_admin(signal.destination, record, now, out);
}

void Node::send_ccs(const CcsSignal& signal, SimTime now, std::vector<Transmission>& out) {
    const Bytes record = build_ccs(signal);
    log(now, "ccs-send", "-",
        Detail()
            .add("dest", signal.destination.str())
            .add("created", signal.created_at)
            .add("trigger", to_string(signal.trigger))
            .add("bundles", std::uint64_t{signal.distinct_tags()})
            .add("record", to_hex(record)));
    send_admin(signal.destination, record, now, out);
}

void Node::send_admin(const EndpointId& destination, const Bytes& record, SimTime now,
                      std::vector<Transmission>& out) {
    PrimaryBlock primary;
    primary.flags = bundle_flags::admin_record | bundle_flags::must_not_fragment;
    primary.destination = destination;
    primary.source = admin_eid();
    primary.creation_time_ms = now.millis();
    primary.creation_sequence = creation_sequence_++;
    primary.lifetime_ms = static_cast<std::uint64_t>(config_.mib.admin_lifetime.micros / 1000);
    Bundle bundle = make_bundle(primary, record);

    if (destination.node == config_.node) {
        handle_admin_record(bundle, now, out);
        return;
    }
    const StoreKey key = store_.insert(std::move(bundle), now + config_.mib.admin_lifetime);
    forward(key, now, out);
    store_.discard(key);
}

void Node::drain_custody(SimTime now, std::vector<Transmission>& out) {
    // Flushing a CCS can only add more output, never more dispositions.
    for (const QueuedDisposition& d : custody_.take_dispositions()) {
        log(now, "disposition-queued", d.tag.str(),
            Detail().add("code", d.code).add("name", disposition_name(d.code)).add("dest", d.destination.str()));
    }
    for (const CcsSignal& signal : custody_.take_flushed()) {
        send_ccs(signal, now, out);
    }
}

void Node::run_retransmissions(const TriggerOutcome& outcome, SimTime now, std::vector<Transmission>& out) {
    for (const Retransmission& r : outcome.retransmissions) {
        const auto record = custody_.records().find(r.tag);
        log(now, "custody-retransmit", r.tag.str(),
            Detail()
                .add("reason", r.reason)
                .add("count", record != custody_.records().end() ? record->second.retransmit_count : 0)
                .add("bundle", bundle_label(r.key)));
        if (store_.find(r.key) != nullptr) {
            forward(r.key, now, out);
        }
    }
    for (const BundleTag& tag : outcome.ignored) {
        log(now, "retransmit-ignored", tag.str(), Detail().add("reason", "no-custody-record"));
    }
}

std::vector<Transmission> Node::on_timer(SimTime now) {
    std::vector<Transmission> out;
    for (const StoreKey key : store_.expired(now)) {
        delete_bundle(key, "lifetime-expired", now, out);
    }
    run_retransmissions(custody_.on_retransmission_trigger(trigger::TimerExpiry{}, now), now, out);
    for (const CrsSignal& signal : reporting_.poll_flush(now)) {
        send_crs(signal, now, out);
    }
    for (const CcsSignal& signal : custody_.poll_flush(now)) {
        send_ccs(signal, now, out);
    }
    drain_custody(now, out);
    return out;
}

std::vector<Transmission> Node::on_contact(std::uint64_t peer, bool up, SimTime now) {
    std::vector<Transmission> out;
    neighbours_[peer] = up;
    if (!up) {
        return out;
    }
    std::deque<StoreKey> queue = std::exchange(waiting_[peer], {});
    for (const StoreKey key : queue) {
        if (store_.find(key) == nullptr) {
            continue;
        }
        store_.remove_constraint(key, RetentionConstraint::forward_pending);
        transmit(key, peer, now, out);
        store_.discard(key);
    }
    run_retransmissions(custody_.on_retransmission_trigger(trigger::ContactStart{peer}, now), now, out);
    drain_custody(now, out);
    return out;
}

std::vector<Transmission> Node::retransmit_command(const std::vector<BundleTag>& tags, SimTime now) {
    std::vector<Transmission> out;
    run_retransmissions(custody_.on_retransmission_trigger(trigger::ExplicitCommand{tags}, now), now, out);
    drain_custody(now, out);
    return out;
}

std::vector<Transmission> Node::forwarding_failure(const BundleTag& tag, SimTime now) {
    std::vector<Transmission> out;
    run_retransmissions(custody_.on_retransmission_trigger(trigger::ForwardingFailure{tag}, now), now, out);
    drain_custody(now, out);
    return out;
}

std::optional<SimTime> Node::next_wakeup() const {
    std::optional<SimTime> earliest;
    for (const auto& candidate : {reporting_.next_deadline(), custody_.next_deadline(), store_.next_expiry()}) {
        if (candidate && (!earliest || *candidate < *earliest)) {
            earliest = candidate;
        }
    }
    return earliest;
}

std::optional<std::string> Node::check_invariants() const {
    const std::size_t accepted = store_.count_with(RetentionConstraint::custody_accepted);
    if (accepted != custody_.records().size()) {
        return config_.name + ": " + std::to_string(accepted) + " bundles hold custody but " +
               std::to_string(custody_.records().size()) + " custody records exist";
    }
    for (const auto& [tag, record] : custody_.records()) {
        if (!store_.has_constraint(record.key, RetentionConstraint::custody_accepted)) {
            return config_.name + ": custody record " + tag.str() + " has no accepted bundle in store";
        }
    }
    for (const auto& [key, entry] : store_.entries()) {
        if (entry.constraints.empty()) {
            return config_.name + ": unconstrained bundle " + entry.bundle.id().str() + " left in store";
        }
        if (entry.constraints.contains(RetentionConstraint::custody_pending)) {
            return config_.name + ": bundle " + entry.bundle.id().str() + " still pending custody evaluation";
        }
    }
    return std::nullopt;
}

std::string Node::dump_state() const {
    std::ostringstream out;
    out << "node " << config_.name << " " << admin_eid().str() << "\n";
    out << "  store " << store_.size() << "\n";
    for (const auto& [key, entry] : store_.entries()) {
        out << "    key=" << key << " bundle=" << entry.bundle.id().str()
            << " dest=" << entry.bundle.primary.destination.str() << " expires=" << entry.expires_at.str()
            << " constraints=";
        bool first = true;
        for (const RetentionConstraint c : entry.constraints) {
            out << (first ? "" : ",") << to_string(c);
            first = false;
        }
        out << "\n";
    }
    out << "  crs-drafts " << reporting_.drafts().drafts().size() << "\n";
    for (const auto& [dest, draft] : reporting_.drafts().drafts()) {
        out << "    dest=" << dest.str() << " created=" << draft.created_at.str() << " bundles=" << draft.distinct.size()
            << "\n";
    }
    out << "  ccs-drafts " << custody_.drafts().drafts().size() << "\n";
    for (const auto& [dest, draft] : custody_.drafts().drafts()) {
        out << "    dest=" << dest.str() << " created=" << draft.created_at.str() << " bundles=" << draft.distinct.size()
            << "\n";
    }
    out << "  custody-records " << custody_.records().size() << "\n";
    for (const auto& [tag, record] : custody_.records()) {
        out << "    tag=" << tag.str() << " key=" << record.key << " deadline=" << record.deadline.str()
            << " retransmits=" << record.retransmit_count;
        if (record.next_hop) {
            out << " next-hop=" << *record.next_hop;
        }
        out << "\n";
    }
    out << "  counters\n";
    for (const auto& [scope, next] : creb_counters_.counters()) {
        out << "    creb " << scope.str() << " next=" << next << "\n";
    }
    for (const auto& [scope, next] : custody_.counters().counters()) {
        out << "    cteb " << scope.str() << " next=" << next << "\n";
    }
    return out.str();
}

} // namespace bprel
