#include "support.hpp"

#include "bprel/errors.hpp"
#include "bprel/sequence.hpp"
#include "bprel/sequence_collection.hpp"

#include <doctest.h>

using namespace bprel;

namespace {

BundleTag tag(const SequenceScope& scope, std::uint64_t number, EndpointId source = {31, 0}) {
    return {scope, number, source};
}

std::set<BundleTag> numbers(const SequenceScope& scope, std::initializer_list<std::uint64_t> values,
                            EndpointId source = {31, 0}) {
    std::set<BundleTag> out;
    for (const auto n : values) {
        out.insert(tag(scope, n, source));
    }
    return out;
}

} // namespace

TEST_CASE("sequence scopes") {
    const SequenceScope dst = SequenceScope::per_destination({21, 1});
    CHECK(dst.is_per_destination());
    CHECK(dst.wire_id() == 0);
    CHECK(dst.str() == "dst:ipn:21.1");
    CHECK(SequenceScope::explicit_id(17).str() == "id:17");
    CHECK_THROWS_AS(SequenceScope::explicit_id(0), Error);
    CHECK(SequenceScope::from_wire(0, {8, 9}) == SequenceScope::per_destination({8, 9}));
    CHECK(SequenceScope::from_wire(17, {8, 9}) == SequenceScope::explicit_id(17));
    // Explicit scopes do not depend on the destination.
    CHECK(SequenceScope::from_wire(17, {8, 9}) == SequenceScope::from_wire(17, {2, 1}));
    CHECK(parse_scope("dst:ipn:21.1") == dst);
    CHECK(parse_scope("id:4") == SequenceScope::explicit_id(4));
}

TEST_CASE("tags print and parse") {
    const BundleTag t = tag(SequenceScope::per_destination({21, 1}), 17);
    CHECK(t.str() == "ipn:31.0/dst:ipn:21.1#17");
    CHECK(parse_tag(t.str()) == t);
    CHECK(parse_tag("ipn:20.0/id:3#0") == tag(SequenceScope::explicit_id(3), 0, {20, 0}));
    for (const char* bad : {"", "ipn:31.0", "ipn:31.0/dst:ipn:21.1", "ipn:31.0/xx:1#2", "ipn:31.0/id:0#1",
                            "ipn:31.0/id:1#-1"}) {
        CHECK_THROWS_AS(parse_tag(bad), Error);
    }
}

TEST_CASE("counters are independent per scope and wrap") {
    SequenceCounterTable table(3);
    const auto a = SequenceScope::per_destination({21, 1});
    const auto b = SequenceScope::explicit_id(5);
    CHECK(table.next(a) == 0);
    CHECK(table.next(a) == 1);
    CHECK(table.next(b) == 0);
    CHECK(table.next(a) == 2);
    CHECK(table.next(a) == 3);
    CHECK(table.next(a) == 0);
    CHECK(table.peek(a) == 1);
    CHECK(table.peek(SequenceScope::explicit_id(9)) == 0);

    SequenceCounterTable full;
    CHECK(full.max_value() == 4294967295ULL);
}

TEST_CASE("tag derivation defaults") {
    PrimaryBlock primary;
    primary.source = {31, 1};
    primary.destination = {21, 1};
    const BundleTag implicit = derive_tag(std::nullopt, 4, std::nullopt, primary);
    CHECK(implicit.scope == SequenceScope::per_destination({21, 1}));
    CHECK(implicit.block_source == EndpointId{31, 0});
    CHECK(derive_tag(0, 4, std::nullopt, primary) == implicit);
    const BundleTag explicit_tag = derive_tag(7, 4, EndpointId{220, 0}, primary);
    CHECK(explicit_tag.scope == SequenceScope::explicit_id(7));
    CHECK(explicit_tag.block_source == EndpointId{220, 0});
}

TEST_CASE("coalesce builds maximal runs") {
    const auto scope = SequenceScope::per_destination({21, 1});
    std::set<BundleTag> tags;
    for (std::uint64_t n = 0; n < 50; ++n) {
        if (n != 17) tags.insert(tag(scope, n));
    }
    const BundleSequenceCollection runs = coalesce(tags);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].first == 0);
    CHECK(runs[0].length == 17);
    CHECK(runs[1].first == 18);
    CHECK(runs[1].length == 32);
    CHECK(runs[1].last() == 49);
    CHECK(runs[0].block_source == EndpointId{31, 0});
}

TEST_CASE("coalesce keeps scopes and block sources apart") {
    const auto dst = SequenceScope::per_destination({2, 1});
    const auto id = SequenceScope::explicit_id(8);
    std::set<BundleTag> tags = numbers(dst, {4, 5, 6, 7, 8, 9});
    tags.merge(numbers(id, {0, 1}));
    tags.merge(numbers(dst, {10}, {99, 0}));
    const auto runs = coalesce(tags);
    CHECK(runs.size() == 3);
    CHECK(expand(runs, {0, 0}) == tags);
}

TEST_CASE("receiver source omission") {
    const auto scope = SequenceScope::per_destination({50, 1});
    std::set<BundleTag> tags = numbers(scope, {0, 1}, {20, 0});
    tags.merge(numbers(scope, {2, 3}, {10, 0}));
    auto runs = coalesce(tags);
    omit_receiver_source(runs, {10, 0});
    CHECK(std::count_if(runs.begin(), runs.end(), [](const auto& s) { return !s.block_source; }) == 1);
    CHECK(expand(runs, {10, 0}) == tags);
    omit_all_sources(runs);
    CHECK(std::none_of(runs.begin(), runs.end(), [](const auto& s) { return s.block_source.has_value(); }));
}

TEST_CASE("expand validates sequences") {
    const auto scope = SequenceScope::explicit_id(1);
    CHECK_THROWS_AS(expand({{4294967290ULL, 10, scope, std::nullopt}}, {1, 0}), SequenceOverflow);
    CHECK_THROWS_AS(expand({{0, 0, scope, std::nullopt}}, {1, 0}), MalformedSignal);
    CHECK(expand({{4294967290ULL, 6, scope, std::nullopt}}, {1, 0}).size() == 6);
}

TEST_CASE("collection wire format") {
    const auto dst = SequenceScope::per_destination({21, 1});
    BundleSequenceCollection collection = {{0, 17, dst, std::nullopt}, {18, 32, dst, std::nullopt}};
    cbor::Writer out;
    encode_collection(out, collection);
    CHECK(to_hex(out.data()) == "828300118202821501831218208202821501");
    cbor::Reader in(out.data());
    CHECK(decode_collection(in) == collection);

    // Sequence ID 0 must travel as a destination EID; length 0 is invalid.
    for (const char* bad : {"81830001 00", "8183000001", "818300", "81830102"}) {
        std::string hex(bad);
        std::erase(hex, ' ');
        const Bytes wire = from_hex(hex);
        cbor::Reader reader(wire);
        CHECK_THROWS_AS(decode_collection(reader), MalformedSignal);
    }
}

TEST_CASE("coalesce against the reference run-length encoder") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto tags = testing::random_tag_set(rng, 500);
        const auto runs = coalesce(tags);
        REQUIRE(expand(runs, {0, 0}) == tags);
        REQUIRE(runs.size() == testing::reference_run_count(tags));
        for (const auto& run : runs) {
            REQUIRE(run.length >= 1);
        }
    }
}
