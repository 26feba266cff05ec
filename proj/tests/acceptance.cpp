// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include "support.hpp"

#include "bprel/bundle.hpp"
#include "bprel/custody.hpp"
#include "bprel/errors.hpp"
#include "bprel/metrics.hpp"
#include "bprel/reporting.hpp"
#include "bprel/scenarios.hpp"
#include "bprel/simulator.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace bprel;

namespace {

using Clock = std::chrono::steady_clock;

/// Collects failure reasons for one criterion.
struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    template <typename A, typename B>
    void equal(const A& actual, const B& expected, const std::string& what) {
        if (!(actual == expected)) {
            std::ostringstream out;
            out << what << ": got " << actual << ", want " << expected;
            failures.push_back(out.str());
        }
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<const Event*> of_kind(const EventLog& log, std::string_view kind) {
    std::vector<const Event*> out;
    for (const Event& e : log.events()) {
        if (e.kind == kind) out.push_back(&e);
    }
    return out;
}

std::string field(const Event& e, std::string_view key) { return e.field(key).value_or(""); }

std::set<BundleTag> tag_range(const SequenceScope& scope, EndpointId source, std::initializer_list<std::uint64_t> numbers) {
    std::set<BundleTag> out;
    for (auto n : numbers) out.insert({scope, n, source});
    return out;
}

void lunar(Check& c) {
    const auto start = Clock::now();
    const RunResult result = run(lunar_scenario(), 1, {.check_invariants = true});
    const double wall = seconds_since(start);
    const Metrics m = summarize(result.log);
    c.equal(m.sent, 50U, "sent");
    c.equal(m.delivered, 49U, "delivered");
    c.equal(m.lost, 1U, "lost");
    c.equal(m.crs_count, 1U, "CRS count");
    c.equal(m.ccs_count, 0U, "CCS count");
    c.expect(result.invariant_violations.empty(), "node invariants");
    c.expect(wall < 5.0, "wall-clock " + std::to_string(wall) + " s");

    const auto sends = of_kind(result.log, "crs-send");
    if (sends.size() != 1) return;
    const Event& crs = *sends[0];
    c.equal(field(crs, "dest"), std::string("ipn:31.1"), "CRS destination");
    const SimTime created = SimTime::from_seconds(std::stod(field(crs, "created")));
    const std::int64_t lag = (crs.time - created).micros - 10'000'000;
    c.expect(lag >= -1 && lag <= 1, "flush at created + 10 s");

    const auto scope = SequenceScope::per_destination({21, 1});
    const CrsContents contents = parse_crs(from_hex(field(crs, "record")), {31, 0});
    c.expect(contents.size() == 1 && contents.count(2) == 1, "CRS carries delivery reports only");
    if (contents.count(2) == 0) return;
    const BundleSequenceCollection runs = coalesce(contents.at(2));
    c.expect(runs.size() == 2 && runs[0].first == 0 && runs[0].length == 17 && runs[1].first == 18 &&
                 runs[1].length == 32 && runs[0].scope == scope,
             "CRS collection is {0..16, 18..49}");
}

void eo(Check& c) {
    const RunResult result = run(eo_scenario(), 1, {.check_invariants = true});
    const Metrics m = summarize(result.log);
    c.equal(m.sent, 5U, "sent");
    c.equal(m.delivered, 5U, "delivered");
    c.equal(m.dropped, 2U, "dropped");
    c.equal(m.dropped_by_node.count("GS2") ? m.dropped_by_node.at("GS2") : 0, 2U, "dropped by GS2");
    c.equal(m.ccs_count, 4U, "CCS count");
    c.expect(result.invariant_violations.empty(), "node invariants");
    c.expect(check_custody_chain(result.log).empty(), "custody chain");

    const auto dst = SequenceScope::per_destination({50, 1});
    const EndpointId pcc{10, 0};
    struct Expected {
        std::string node;
        std::string dest;
        CcsContents contents;
    };
    const std::vector<Expected> expected = {
        {"GS2", "ipn:10.0",
         {{1, tag_range(dst, pcc, {0, 1})}, {-1, tag_range(dst, pcc, {2, 4})}, {-2, tag_range(dst, pcc, {3})}}},
        {"EOSAT", "ipn:10.0", {{1, tag_range(dst, pcc, {2, 3, 4})}}},
        {"EOSAT", "ipn:20.0", {{1, tag_range(dst, {20, 0}, {0, 1})}}},
        {"GS2", "ipn:10.0", {{-2, tag_range(dst, pcc, {2, 4})}}},
    };
    const auto sends = of_kind(result.log, "ccs-send");
    if (sends.size() != expected.size()) return;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const Event& e = *sends[i];
        const std::string label = "CCS " + std::to_string(i + 1);
        c.equal(e.node, expected[i].node, label + " sender");
        c.equal(field(e, "dest"), expected[i].dest, label + " destination");
        const EndpointId receiver = parse_eid(field(e, "dest"));
        c.expect(parse_ccs(from_hex(field(e, "record")), receiver) == expected[i].contents, label + " contents");
    }
}

void compression(Check& c) {
    const Metrics m = summarize(run(lunar_scenario(), 1).log);
    c.expect(m.admin_records() > 0, "no administrative records");
    if (m.admin_records() == 0) return;
    const double ratio = static_cast<double>(m.per_bundle_baseline) / static_cast<double>(m.admin_records());
    c.expect(ratio >= 40.0, "ratio " + std::to_string(ratio));
}

void sequences(Check& c) {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000 && c.failures.empty(); ++i) {
        const auto tags = testing::random_tag_set(rng, 10'000);
        const auto runs = coalesce(tags);
        c.expect(expand(runs, {0, 0}) == tags, "expand(coalesce(S)) != S at set " + std::to_string(i));
        c.expect(runs.size() == testing::reference_run_count(tags), "not minimal at set " + std::to_string(i));
    }
    const double wall = seconds_since(start);
    c.expect(wall < 10.0, "wall-clock " + std::to_string(wall) + " s");
}

void round_trips(Check& c) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 1000 && c.failures.empty(); ++i) {
        const std::string at = " at " + std::to_string(i);
        const Bundle bundle = testing::random_bundle(rng);
        const Bytes wire = encode_bundle(bundle);
        c.expect(decode_bundle(wire) == bundle && encode_bundle(decode_bundle(wire)) == wire, "bundle" + at);

        const CrebData creb = testing::random_creb(rng);
        c.expect(encode_creb(decode_creb(encode_creb(creb))) == encode_creb(creb), "CREB" + at);
        const CtebData cteb = testing::random_cteb(rng);
        c.expect(decode_cteb(encode_cteb(cteb)) == cteb, "CTEB" + at);

        const auto crs = testing::random_signal<std::uint64_t>(rng, {0, 1, 2, 3}, 100);
        const Bytes crs_wire = build_crs(crs);
        c.expect(parse_crs(crs_wire, crs.destination.admin()) == crs.entries, "CRS" + at);

        const auto ccs = testing::random_signal<std::int64_t>(rng, {1, 2, -1, -2}, 100);
        CcsContents expected;
        for (const auto& [code, tags] : ccs.entries) {
            for (BundleTag tag : tags) {
                tag.block_source = ccs.destination.admin();
                expected[code].insert(tag);
            }
        }
        c.expect(parse_ccs(build_ccs(ccs), ccs.destination.admin()) == expected, "CCS" + at);

        // A flipped payload byte must fail the CRC.
        Bundle protected_bundle = bundle;
        for (auto& block : protected_bundle.blocks) {
            if (block.crc_type == CrcType::none) block.crc_type = CrcType::crc32c;
        }
        Bytes corrupt = encode_bundle(protected_bundle);
        corrupt[corrupt.size() - 6] ^= 0x40;
        bool detected = false;
        try {
            decode_bundle(corrupt);
        } catch (const Error&) {
            detected = true;
        }
        c.expect(detected, "corruption undetected" + at);
    }
}

void custody_chain(Check& c) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const RunResult result = run(eo_random_scenario(), seed, {.check_invariants = true});
        const Metrics m = summarize(result.log);
        const std::string at = " seed " + std::to_string(seed);
        c.equal(m.delivered, 200U, "delivered" + at);
        c.expect(check_custody_chain(result.log).empty(), "chain violated" + at);
        c.expect(result.invariant_violations.empty(), "node invariants" + at);
    }
}

void policy_distribution(Check& c) {
    ProbabilisticPolicy policy(0.5, 0.25, 0.25, 12345);
    CustodyContext context;
    context.tag = {SequenceScope::explicit_id(1), 0, {1, 0}};
    std::map<CustodyDecision, int> counts;
    constexpr int n = 10'000;
    for (int i = 0; i < n; ++i) ++counts[policy.evaluate(context)];
    const auto near = [&](CustodyDecision d, double p) {
        const double f = static_cast<double>(counts[d]) / n;
        c.expect(std::abs(f - p) <= 0.02, std::string(to_string(d)) + " frequency " + std::to_string(f));
    };
    near(CustodyDecision::accept, 0.5);
    near(CustodyDecision::refuse_drop, 0.25);
    near(CustodyDecision::refuse_forward, 0.25);
}

void determinism(Check& c) {
    for (const auto& name : builtin_names()) {
        const Scenario scenario = *builtin_scenario(name);
        const std::string a = run(scenario, 7).log.str();
        const std::string b = run(scenario, 7).log.str();
        c.expect(!a.empty() && a == b, name + " logs differ");
    }
}

} // namespace

int main() {
    const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
        {"lunar delivery reporting", lunar},
        {"earth observation custody signalling", eo},
        {"administrative record compression", compression},
        {"sequence coalescing", sequences},
        {"wire round trips and corruption", round_trips},
        {"custody chain under random loss", custody_chain},
        {"probabilistic custody policy", policy_distribution},
        {"deterministic replay", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, body] : criteria) {
        ++index;
        Check check;
        try {
            body(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool ok = check.failures.empty();
        std::cout << (ok ? "PASS " : "FAIL ") << index << ' ' << name;
        if (!ok) {
            std::cout << " (";
            for (std::size_t i = 0; i < check.failures.size() && i < 5; ++i) {
                std::cout << (i ? "; " : "") << check.failures[i];
            }
            std::cout << ')';
            ++failed;
        }
        std::cout << '\n';
    }
    return failed == 0 ? 0 : 1;
}
