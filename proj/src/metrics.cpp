#include "bprel/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace bprel {

namespace {

bool is_admin(const Event& event) { return event.field("admin").value_or("0") == "1"; }

std::string time_or_dash(const std::optional<SimTime>& time) { return time ? time->str() : "-"; }

} // namespace

Metrics summarize(const EventLog& log) {
    Metrics m;
    std::set<std::string> delivered;
    for (const Event& e : log.events()) {
        if (e.kind == "adu-send") {
            ++m.sent;
        } else if (e.kind == "deliver") {
            delivered.insert(e.field("bundle").value_or(e.tag));
            m.last_delivery = e.time;
        } else if (e.kind == "link-loss" && !is_admin(e)) {
            ++m.lost;
        } else if (e.kind == "delete" && !is_admin(e)) {
            ++m.dropped;
            ++m.dropped_by_node[e.node];
        } else if (e.kind == "crs-send") {
            ++m.crs_count;
        } else if (e.kind == "ccs-send") {
            ++m.ccs_count;
        } else if (e.kind == "report-queued" || e.kind == "disposition-queued") {
            ++m.per_bundle_baseline;
        } else if (e.kind == "custody-accept") {
            ++m.custody_accepted;
        } else if (e.kind == "custody-refuse") {
            ++m.custody_refused;
            ++m.refused_by_node[e.node];
        } else if (e.kind == "custody-retransmit") {
            ++m.retransmissions;
        } else if (e.kind == "custody-release") {
            m.final_custody_release = e.time;
        }
    }
    m.delivered = delivered.size();
    m.lost_or_dropped = m.lost + m.dropped;
    m.undelivered = m.sent > m.delivered ? m.sent - m.delivered : 0;
    return m;
}

std::string format_text(const Metrics& m) {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"Number of Bundles Sent", std::to_string(m.sent)},
        {"Bundles Delivered", std::to_string(m.delivered)},
        {"Bundles Lost on Links", std::to_string(m.lost)},
        {"Bundles Dropped by Nodes", std::to_string(m.dropped)},
        {"Bundles Lost/Dropped", std::to_string(m.lost_or_dropped)},
        {"Bundles Undelivered", std::to_string(m.undelivered)},
        {"Compressed Reporting Signals", std::to_string(m.crs_count)},
        {"Compressed Custody Signals", std::to_string(m.ccs_count)},
        {"Per-Bundle Signal Baseline", std::to_string(m.per_bundle_baseline)},
        {"Custody Accepted", std::to_string(m.custody_accepted)},
        {"Custody Refused", std::to_string(m.custody_refused)},
        {"Custody Retransmissions", std::to_string(m.retransmissions)},
        {"Last Delivery Time", time_or_dash(m.last_delivery)},
        {"Final Custody Release Time", time_or_dash(m.final_custody_release)},
    };
    for (const auto& [node, count] : m.dropped_by_node) {
        rows.emplace_back("Dropped by " + node, std::to_string(count));
    }
    for (const auto& [node, count] : m.refused_by_node) {
        rows.emplace_back("Custody Refused by " + node, std::to_string(count));
    }
    std::size_t width = 0;
    for (const auto& row : rows) {
        width = std::max(width, row.first.size());
    }
    std::ostringstream out;
    for (const auto& [label, value] : rows) {
        out << std::setw(static_cast<int>(width)) << label << ' ' << value << '\n';
    }
    return out.str();
}

std::string format_kv(const Metrics& m) {
    std::ostringstream out;
    out << "sent=" << m.sent << '\n'
        << "delivered=" << m.delivered << '\n'
        << "lost=" << m.lost << '\n'
        << "dropped=" << m.dropped << '\n'
        << "lost_or_dropped=" << m.lost_or_dropped << '\n'
        << "undelivered=" << m.undelivered << '\n'
        << "crs_count=" << m.crs_count << '\n'
        << "ccs_count=" << m.ccs_count << '\n'
        << "per_bundle_signal_count_baseline=" << m.per_bundle_baseline << '\n'
        << "custody_accepted=" << m.custody_accepted << '\n'
        << "custody_refused=" << m.custody_refused << '\n'
        << "retransmissions=" << m.retransmissions << '\n'
        << "last_delivery_time=" << time_or_dash(m.last_delivery) << '\n'
        << "final_custody_release_time=" << time_or_dash(m.final_custody_release) << '\n';
    for (const auto& [node, count] : m.dropped_by_node) {
        out << "dropped." << node << '=' << count << '\n';
    }
    for (const auto& [node, count] : m.refused_by_node) {
        out << "refused." << node << '=' << count << '\n';
    }
    return out.str();
}

std::vector<std::string> check_custody_chain(const EventLog& log) {
    struct State {
        std::set<std::string> holders;
        bool finished = false;
    };
    std::map<std::string, State> bundles;
    std::vector<std::string> violations;

    const auto check = [&](SimTime at) {
        for (const auto& [bundle, state] : bundles) {
            if (state.holders.size() > 2) {
                violations.push_back(at.str() + " " + bundle + " has " + std::to_string(state.holders.size()) +
                                     " custodians");
            } else if (state.holders.empty() && !state.finished) {
                violations.push_back(at.str() + " " + bundle + " has no custodian before delivery");
            }
        }
    };

    const auto& events = log.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const std::string bundle = e.field("bundle").value_or("?");
        if (e.kind == "custody-request" || (e.kind == "custody-accept" && e.field("final") == "0")) {
            bundles[bundle].holders.insert(e.node);
        } else if (e.kind == "custody-release" || e.kind == "custody-abandon") {
            if (const auto it = bundles.find(bundle); it != bundles.end()) {
                it->second.holders.erase(e.node);
            }
        } else if (e.kind == "deliver" ||
                   (e.kind == "delete" && e.field("reason") == "lifetime-expired")) {
            if (const auto it = bundles.find(bundle); it != bundles.end()) {
                it->second.finished = true;
            }
        }
        if (i + 1 == events.size() || events[i + 1].time != e.time) {
            check(e.time);
        }
    }
    return violations;
}

} // namespace bprel
