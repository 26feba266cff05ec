#include "bprel/scenarios.hpp"

namespace bprel {

namespace {

NodeConfig make_node(std::string name, std::uint64_t number, std::map<std::uint64_t, std::uint64_t> routes) {
    NodeConfig node;
    node.name = std::move(name);
    node.node = number;
    node.routes = std::move(routes);
    return node;
}

LinkConfig make_link(std::string a, std::string b, double delay_seconds) {
    LinkConfig link;
    link.a = std::move(a);
    link.b = std::move(b);
    link.delay = Duration::from_seconds(delay_seconds);
    return link;
}

} // namespace

Scenario lunar_scenario() {
    Scenario s;
    s.name = "lunar";
    s.duration = Duration::from_seconds(60.0);

    for (auto node : {make_node("user1", 31, {{21, 220}}), make_node("lgw", 220, {}),
                      make_node("rover1", 21, {{31, 220}})}) {
        node.mib.crs = {100, Duration::from_seconds(10.0)};
        node.mib.retransmission_timer = Duration::from_seconds(30.0);
        s.nodes.push_back(std::move(node));
    }

    s.links.push_back(make_link("user1", "lgw", 0.01));
    LinkConfig relay = make_link("lgw", "rover1", 0.01);
    relay.loss.kind = LossModel::Kind::scripted;
    relay.loss.drops.push_back({"lgw", "rover1", std::nullopt, parse_tag("ipn:31.0/dst:ipn:21.1#17")});
    s.links.push_back(std::move(relay));

    TrafficSpec traffic;
    traffic.start = SimTime::from_seconds(1.0);
    traffic.interval = Duration::from_seconds(0.02);
    traffic.source = {31, 1};
    traffic.destination = {21, 1};
    traffic.count = 50;
    traffic.options.creb = CrebRequest{ReportTypes::of({ReportReason::delivery}), std::nullopt};
    s.traffic.push_back(traffic);
    return s;
}

Scenario lunar_random_scenario(double loss_rate) {
    Scenario s = lunar_scenario();
    s.name = "lunar-random";
    LossModel& loss = s.links[1].loss;
    loss.kind = LossModel::Kind::probabilistic;
    loss.rate = loss_rate;
    loss.drops.clear();
    return s;
}

Scenario eo_scenario() {
    Scenario s;
    s.name = "eo";
    s.duration = Duration::from_seconds(60.0);

    for (auto node : {make_node("PCC", 10, {{50, 20}}), make_node("GS2", 20, {}),
                      make_node("EOSAT", 50, {{10, 20}})}) {
        node.mib.ccs = {5, Duration::from_seconds(15.0)};
        node.mib.retransmission_timer = Duration::from_seconds(20.0);
        s.nodes.push_back(std::move(node));
    }
    CustodyPolicySpec& gs2 = s.nodes[1].mib.custody_policy;
    gs2.kind = CustodyPolicySpec::Kind::scripted;
    gs2.script = {
        {0, {CustodyDecision::accept}},
        {1, {CustodyDecision::accept}},
        {2, {CustodyDecision::refuse_drop, CustodyDecision::refuse_forward}},
        {3, {CustodyDecision::refuse_forward}},
        {4, {CustodyDecision::refuse_drop, CustodyDecision::refuse_forward}},
    };
    gs2.fallback = CustodyDecision::accept;

    s.links.push_back(make_link("PCC", "GS2", 0.05));
    s.links.push_back(make_link("GS2", "EOSAT", 0.05));

    TrafficSpec traffic;
    traffic.start = SimTime::from_seconds(1.0);
    traffic.source = {10, 1};
    traffic.destination = {50, 1};
    traffic.count = 5;
    traffic.options.custody = true;
    s.traffic.push_back(traffic);
    return s;
}

Scenario eo_random_scenario() {
    Scenario s = eo_scenario();
    s.name = "eo-random";
    s.duration = Duration::from_seconds(600.0);

    CustodyPolicySpec& gs2 = s.nodes[1].mib.custody_policy;
    gs2.kind = CustodyPolicySpec::Kind::probabilistic;
    gs2.script.clear();
    gs2.p_accept = 0.5;
    gs2.p_drop = 0.25;
    gs2.p_forward = 0.25;

    for (std::size_t i = 0; i < s.links.size(); ++i) {
        s.links[i].loss.kind = LossModel::Kind::probabilistic;
        s.links[i].loss.rate = 0.10;
        s.links[i].loss.seed = i + 1;
    }

    s.traffic.front().count = 200;
    s.traffic.front().interval = Duration::from_seconds(0.5);
    return s;
}

std::vector<std::string> builtin_names() { return {"lunar", "lunar-random", "eo", "eo-random"}; }

std::optional<Scenario> builtin_scenario(std::string_view name) {
    if (name == "lunar") return lunar_scenario();
    if (name == "lunar-random") return lunar_random_scenario();
    if (name == "eo") return eo_scenario();
    if (name == "eo-random") return eo_random_scenario();
    return std::nullopt;
}

} // namespace bprel
