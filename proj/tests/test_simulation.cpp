#include "bprel/errors.hpp"
#include "bprel/metrics.hpp"
#include "bprel/node.hpp"
#include "bprel/scenarios.hpp"
#include "bprel/simulator.hpp"
#include "bprel/store.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace bprel;

namespace {

std::vector<const Event*> of_kind(const EventLog& log, std::string_view kind) {
    std::vector<const Event*> out;
    for (const Event& e : log.events()) {
        if (e.kind == kind) out.push_back(&e);
    }
    return out;
}

/// Two nodes, a (ipn:1) and b (ipn:2), one link.
Scenario pair_scenario() {
    Scenario s;
    s.name = "pair";
    s.duration = Duration::from_seconds(30.0);
    NodeConfig a;
    a.name = "a";
    a.node = 1;
    NodeConfig b;
    b.name = "b";
    b.node = 2;
    s.nodes = {a, b};
    LinkConfig link;
    link.a = "a";
    link.b = "b";
    link.delay = Duration::from_seconds(0.01);
    s.links = {link};
    TrafficSpec traffic;
    traffic.start = SimTime::from_seconds(1.0);
    traffic.source = {1, 1};
    traffic.destination = {2, 1};
    s.traffic = {traffic};
    return s;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

} // namespace

TEST_CASE("store retention constraints") {
    BundleStore store(2);
    const StoreKey a = store.insert(Bundle{}, SimTime::from_seconds(5.0));
    const StoreKey b = store.insert(Bundle{}, SimTime::from_seconds(9.0));
    CHECK(store.full());
    CHECK_THROWS_AS(store.insert(Bundle{}, {}), StoreFull);
    store.add_constraint(a, RetentionConstraint::custody_accepted);
    CHECK_FALSE(store.discard(a));
    CHECK(store.discard(b));
    CHECK(store.size() == 1);
    CHECK(store.next_expiry() == SimTime::from_seconds(5.0));
    CHECK(store.expired(SimTime::from_seconds(5.0)) == std::vector<StoreKey>{a});
    store.expire(a);
    CHECK(store.size() == 0);
    CHECK(std::string(to_string(RetentionConstraint::custody_pending)) == "COMPRESSED_CUSTODY_PENDING");
}

TEST_CASE("event log text round trip") {
    EventLog log;
    log.add({SimTime::from_seconds(1.5), "n", "deliver", "ipn:1.0/id:1#2", Detail().add("bundle", "x").add("k", 3)});
    log.add({SimTime::from_micros(7), "m", "contact-start", "-", ""});
    const EventLog parsed = EventLog::parse(log.str());
    CHECK(parsed.events() == log.events());
    CHECK(log.events()[0].line() == "1.500000\tn\tdeliver\tipn:1.0/id:1#2\tbundle=x k=3");
    CHECK(log.events()[0].field("k") == "3");
    CHECK_FALSE(log.events()[0].field("missing").has_value());
    CHECK_THROWS_AS(EventLog::parse("garbage\n"), Error);
}

TEST_CASE("node rejects malformed input and unroutable traffic") {
    EventLog log;
    NodeConfig config;
    config.name = "solo";
    config.node = 7;
    Node node(config, 0, log);
    CHECK(node.on_receive(Bytes{0x9F, 0x00}, 3, {}).empty());
    REQUIRE(of_kind(log, "malformed").size() == 1);

    CHECK(node.send_adu({7, 1}, {99, 1}, Bytes{1}, {}, {}).empty());
    const auto deletes = of_kind(log, "delete");
    REQUIRE(deletes.size() == 1);
    CHECK(deletes[0]->field("reason") == "no-route");
    CHECK(node.store().size() == 0);
    CHECK_THROWS_AS(node.send_adu({8, 1}, {99, 1}, Bytes{1}, {}, {}), Error);
}

TEST_CASE("empty traffic logs only contact events") {
    Scenario s = pair_scenario();
    s.traffic.clear();
    const RunResult result = run(s, 1);
    REQUIRE(result.log.size() == 1);
    CHECK(result.log.events()[0].kind == "contact-start");
    const Metrics m = summarize(result.log);
    CHECK(m.sent == 0);
    CHECK(m.delivered == 0);
}

TEST_CASE("bundles wait for the next contact window") {
    Scenario s = pair_scenario();
    s.links[0].windows = {{SimTime::from_seconds(3.0), SimTime::from_seconds(10.0)}};
    const RunResult result = run(s, 1);
    REQUIRE(of_kind(result.log, "forward-wait").size() == 1);
    CHECK(of_kind(result.log, "forward-wait")[0]->time == SimTime::from_seconds(1.0));
    const auto delivered = of_kind(result.log, "deliver");
    REQUIRE(delivered.size() == 1);
    CHECK(delivered[0]->time == SimTime::from_seconds(3.01));
    CHECK(of_kind(result.log, "contact-end").size() == 1);
}

TEST_CASE("bundles expire while waiting") {
    Scenario s = pair_scenario();
    s.links[0].windows = {{SimTime::from_seconds(5.0), SimTime::from_seconds(10.0)}};
    s.traffic[0].options.lifetime = Duration::from_seconds(2.0);
    const RunResult result = run(s, 1);
    const auto deletes = of_kind(result.log, "delete");
    REQUIRE(deletes.size() == 1);
    CHECK(deletes[0]->time == SimTime::from_seconds(3.0));
    CHECK(deletes[0]->field("reason") == "lifetime-expired");
    CHECK(of_kind(result.log, "deliver").empty());
}

TEST_CASE("custody bundles are retransmitted when a contact starts") {
    Scenario s = pair_scenario();
    s.nodes[0].mib.retransmit_on_contact = true;
    s.nodes[0].mib.retransmission_timer = Duration::from_seconds(100.0);
    s.links[0].windows = {{SimTime::from_seconds(0.0), SimTime::from_seconds(2.0)},
                          {SimTime::from_seconds(5.0), SimTime::from_seconds(10.0)}};
    s.links[0].loss.kind = LossModel::Kind::scripted;
    s.links[0].loss.drops = {{"a", "b", 0, std::nullopt}};
    s.traffic[0].options.custody = true;

    const RunResult result = run(s, 1, {.check_invariants = true});
    CHECK(result.invariant_violations.empty());
    REQUIRE(of_kind(result.log, "link-loss").size() == 1);
    const auto retransmits = of_kind(result.log, "custody-retransmit");
    REQUIRE(retransmits.size() == 1);
    CHECK(retransmits[0]->time == SimTime::from_seconds(5.0));
    CHECK(retransmits[0]->field("reason") == "contact-start");
    const auto delivered = of_kind(result.log, "deliver");
    REQUIRE(delivered.size() == 1);
    CHECK(delivered[0]->time == SimTime::from_seconds(5.01));
}

TEST_CASE("custody timer retransmits lost bundles") {
    Scenario s = pair_scenario();
    s.nodes[0].mib.retransmission_timer = Duration::from_seconds(5.0);
    s.nodes[1].mib.ccs = FlushPolicy{100, Duration::from_seconds(1.0)};
    s.links[0].loss.kind = LossModel::Kind::scripted;
    s.links[0].loss.drops = {{"a", "b", 0, std::nullopt}};
    s.traffic[0].options.custody = true;
    const RunResult result = run(s, 1, {.check_invariants = true});
    CHECK(result.invariant_violations.empty());
    const auto retransmits = of_kind(result.log, "custody-retransmit");
    REQUIRE(retransmits.size() == 1);
    CHECK(retransmits[0]->time == SimTime::from_seconds(6.0));
    CHECK(retransmits[0]->field("reason") == "timer");
    CHECK(summarize(result.log).delivered == 1);
    CHECK(check_custody_chain(result.log).empty());
}

TEST_CASE("operator retransmit command") {
    Scenario s = pair_scenario();
    s.traffic[0].options.custody = true;
    s.commands = {{SimTime::from_seconds(1.001), "a", {parse_tag("ipn:1.0/dst:ipn:2.1#0"), parse_tag("ipn:1.0/id:4#0")}}};
    const RunResult result = run(s, 1);
    const auto retransmits = of_kind(result.log, "custody-retransmit");
    REQUIRE(retransmits.size() == 1);
    CHECK(retransmits[0]->field("reason") == "command");
    CHECK(of_kind(result.log, "retransmit-ignored").size() == 1);
    // The destination sees the copy as a duplicate.
    CHECK(of_kind(result.log, "custody-duplicate").size() == 1);
    CHECK(summarize(result.log).delivered == 1);
}

TEST_CASE("scenario validation") {
    SUBCASE("unknown link end") {
        Scenario s = pair_scenario();
        s.links[0].b = "c";
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    SUBCASE("route via a non-neighbour") {
        Scenario s = pair_scenario();
        s.nodes[0].routes[5] = 9;
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    SUBCASE("traffic source not on any node") {
        Scenario s = pair_scenario();
        s.traffic[0].source = {3, 1};
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    SUBCASE("duplicate node number") {
        Scenario s = pair_scenario();
        s.nodes[1].node = 1;
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    SUBCASE("scripted drop off the link") {
        Scenario s = pair_scenario();
        s.links[0].loss.drops = {{"a", "z", 0, std::nullopt}};
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    SUBCASE("bad probabilities") {
        Scenario s = pair_scenario();
        s.nodes[1].mib.custody_policy.kind = CustodyPolicySpec::Kind::probabilistic;
        s.nodes[1].mib.custody_policy.p_accept = 0.9;
        CHECK_THROWS_AS(validate(s), ConfigError);
    }
    for (const auto& name : builtin_names()) {
        CHECK_NOTHROW(validate(*builtin_scenario(name)));
    }
    CHECK_FALSE(builtin_scenario("mars").has_value());
}

TEST_CASE("scenario files") {
    for (const char* name : {"lunar", "eo"}) {
        const Scenario from_file = load_scenario(std::string(BPREL_SOURCE_DIR) + "/scenarios/" + name + ".yaml");
        CHECK(run(from_file, 1).log.str() == run(*builtin_scenario(name), 1).log.str());
    }
    CHECK_THROWS_AS(load_scenario("/nonexistent/missing.yaml"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("duration: 10\nnodes: [{name: a, node: 1, colour: red}]\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("nodes: []\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("duration: [1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("duration: ten\nnodes: [{name: a, node: 1}]\n"), ConfigError);

    const Scenario minimal = parse_scenario(R"(
duration: 5
nodes:
  - {name: a, node: 1}
  - name: b
    node: 2
    mib:
      custody_policy: {kind: probabilistic, p_accept: 0.5, p_drop: 0.25, p_forward: 0.25}
links:
  - a: a
    b: b
    loss: {kind: probabilistic, rate: 0.1, seed: 4}
    windows: [[0, 2], [3, 5]]
traffic:
  - {start: 1, source: "ipn:1.1", destination: "ipn:2.1", custody: true, creb: {types: "delivery|deletion", report_to: "ipn:1.2"}}
)");
    CHECK(minimal.links[0].windows.size() == 2);
    CHECK(minimal.links[0].loss.rate == doctest::Approx(0.1));
    CHECK(minimal.traffic[0].options.creb->report_to == EndpointId{1, 2});
    CHECK(minimal.nodes[1].mib.custody_policy.kind == CustodyPolicySpec::Kind::probabilistic);
}

TEST_CASE("lunar run") {
    const RunResult result = run(lunar_scenario(), 1, {.check_invariants = true, .dump_state = true});
    CHECK(result.invariant_violations.empty());
    const Metrics m = summarize(result.log);
    CHECK(m.sent == 50);
    CHECK(m.delivered == 49);
    CHECK(m.lost == 1);
    CHECK(m.crs_count == 1);
    CHECK(m.per_bundle_baseline == 49);
    CHECK(format_text(m).find("Bundles Delivered 49\n") != std::string::npos);
    CHECK(format_kv(m).find("delivered=49\n") != std::string::npos);

    const auto gaps = of_kind(result.log, "gap-detected");
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0]->node == "user1");
    CHECK(gaps[0]->field("missing") == "17");
    CHECK(result.node_state.at("user1").find("creb dst:ipn:21.1 next=50") != std::string::npos);
}

TEST_CASE("eo run mid-way state dump") {
    Scenario s = eo_scenario();
    s.duration = Duration::from_seconds(10.0);
    const RunResult result = run(s, 1, {.check_invariants = true, .dump_state = true});
    CHECK(result.invariant_violations.empty());
    const std::string& pcc = result.node_state.at("PCC");
    CHECK(pcc.find("custody-records 3") != std::string::npos);
    CHECK(pcc.find("tag=ipn:10.0/dst:ipn:50.1#2") != std::string::npos);
    CHECK(result.node_state.at("EOSAT").find("ccs-drafts 2") != std::string::npos);
    CHECK(result.node_state.at("GS2").find("custody-records 2") != std::string::npos);
}

TEST_CASE("custody chain checker") {
    EventLog log;
    const auto at = [](double s) { return SimTime::from_seconds(s); };
    log.add({at(1), "a", "custody-request", "t", "bundle=B"});
    log.add({at(2), "b", "custody-accept", "t", "bundle=B final=0"});
    log.add({at(3), "c", "custody-accept", "t", "bundle=B final=0"});
    log.add({at(4), "a", "custody-release", "t", "bundle=B"});
    log.add({at(4), "b", "custody-release", "t", "bundle=B"});
    log.add({at(5), "c", "custody-release", "t", "bundle=B"});
    log.add({at(6), "d", "deliver", "t", "bundle=B"});
    const auto violations = check_custody_chain(log);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].find("3 custodians") != std::string::npos);
    CHECK(violations[1].find("no custodian") != std::string::npos);
    CHECK(check_custody_chain(EventLog{}).empty());
}

TEST_CASE("metrics of an empty log") {
    const Metrics m = summarize(EventLog{});
    CHECK(m.sent == 0);
    CHECK(m.admin_records() == 0);
    CHECK_FALSE(m.last_delivery.has_value());
    CHECK(format_kv(m).find("last_delivery_time=-") != std::string::npos);
}

TEST_CASE("runs are replayable") {
    const RunResult a = run(eo_random_scenario(), 42);
    const RunResult b = run(eo_random_scenario(), 42);
    const RunResult c = run(eo_random_scenario(), 43);
    CHECK(a.log.str() == b.log.str());
    CHECK(a.log.str() != c.log.str());
    const RunResult d = run(lunar_random_scenario(0.2), 5);
    CHECK(d.log.str() == run(lunar_random_scenario(0.2), 5).log.str());
    CHECK(summarize(d.log).lost > 0);
}

TEST_CASE("scenario file texts exist") {
    CHECK(slurp(std::string(BPREL_SOURCE_DIR) + "/scenarios/lunar.yaml").find("ipn:31.0/dst:ipn:21.1#17") !=
          std::string::npos);
}
