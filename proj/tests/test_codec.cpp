#include "support.hpp"

#include "bprel/bundle.hpp"
#include "bprel/cbor.hpp"
#include "bprel/crc.hpp"
#include "bprel/eid.hpp"
#include "bprel/errors.hpp"

#include <doctest.h>

#include <string_view>

using namespace bprel;

namespace {

Bytes ascii(std::string_view text) { return Bytes(text.begin(), text.end()); }

} // namespace

TEST_CASE("crc check values") {
    const Bytes check = ascii("123456789");
    CHECK(crc16_x25(check) == 0x906E);
    CHECK(crc32c(check) == 0xE3069283);
    CHECK(crc32c({}) == 0);
}

TEST_CASE("cbor integers use the shortest head") {
    const std::pair<std::uint64_t, std::string_view> cases[] = {
        {0, "00"},           {23, "17"},           {24, "1818"},
        {255, "18ff"},       {256, "190100"},      {65535, "19ffff"},
        {65536, "1a00010000"}, {4294967296, "1b0000000100000000"},
    };
    for (const auto& [value, hex] : cases) {
        cbor::Writer out;
        out.uint(value);
        CHECK(to_hex(out.data()) == hex);
        const Bytes wire = from_hex(hex);
        cbor::Reader in(wire);
        CHECK(in.read_uint() == value);
    }
    cbor::Writer negative;
    negative.integer(-1);
    negative.integer(-25);
    CHECK(to_hex(negative.data()) == "203818");
}

TEST_CASE("cbor reader rejects non-minimal and truncated input") {
    for (const char* hex : {"1817", "190017", "1a000000ff", "1b00000000000000ff"}) {
        const Bytes wire = from_hex(hex);
        cbor::Reader in(wire);
        CHECK_THROWS_AS(in.read_uint(), MalformedCbor);
    }
    const Bytes truncated_wire = from_hex("19ff");
    cbor::Reader truncated(truncated_wire);
    CHECK_THROWS_AS(truncated.read_uint(), MalformedCbor);
    const Bytes wrong_type_wire = from_hex("40");
    cbor::Reader wrong_type(wrong_type_wire);
    CHECK_THROWS_AS(wrong_type.read_uint(), MalformedCbor);
    const Bytes trailing_wire = from_hex("0000");
    cbor::Reader trailing(trailing_wire);
    trailing.read_uint();
    CHECK_THROWS_AS(trailing.expect_end(), MalformedCbor);
}

TEST_CASE("cbor diagnostic notation") {
    CHECK(cbor::diagnostic(from_hex("8202821501")) == "[2, [21, 1]]");
    CHECK(cbor::diagnostic(from_hex("420102")) == "h'0102'");
    CHECK(cbor::diagnostic(from_hex("a1218100")).find("-2") != std::string::npos);
}

TEST_CASE("hex helpers") {
    CHECK(to_hex(from_hex("00Ff10")) == "00ff10");
    CHECK_THROWS_AS(from_hex("abc"), Error);
    CHECK_THROWS_AS(from_hex("zz"), Error);
}

TEST_CASE("ipn endpoint encoding") {
    CHECK(to_hex(encode_eid({21, 1})) == "8202821501");
    CHECK(to_hex(encode_eid({0, 0})) == "8202820000");
    CHECK(to_hex(encode_eid({220, 0})) == "82028218dc00");
    CHECK(decode_eid(from_hex("82028218dc00")) == EndpointId{220, 0});
    CHECK(parse_eid("ipn:31.1") == EndpointId{31, 1});
    CHECK(EndpointId{31, 1}.admin().str() == "ipn:31.0");

    CHECK_THROWS_AS(decode_eid(from_hex("8201821501")), MalformedEid);
    CHECK_THROWS_AS(decode_eid(from_hex("820282150102")), MalformedEid);
    for (const char* bad : {"dtn:none", "ipn:1", "ipn:a.b", "ipn:1.2.3", "ipn:-1.0", ""}) {
        CHECK_THROWS_AS(parse_eid(bad), MalformedEid);
    }
}

TEST_CASE("bundle encoding round trip") {
    PrimaryBlock primary;
    primary.destination = {21, 1};
    primary.source = {31, 1};
    primary.creation_time_ms = 1000;
    Bundle bundle = make_bundle(primary, ascii("hello"));
    bundle.add_extension(make_creb_block({9, 0, ReportTypes(4), std::nullopt, std::nullopt}));

    const Bytes wire = encode_bundle(bundle);
    CHECK(wire.front() == 0x9F);
    CHECK(wire.back() == 0xFF);
    const Bundle decoded = decode_bundle(wire);
    CHECK(decoded == bundle);
    CHECK(encode_bundle(decoded) == wire);
    CHECK(decoded.blocks.front().number == 2);
    CHECK(decoded.payload().data == ascii("hello"));
    CHECK(decoded.id().str() == "ipn:31.1/1000/0");
}

TEST_CASE("bundle decoding rejects structural problems") {
    PrimaryBlock primary;
    primary.destination = {2, 1};
    primary.source = {1, 1};
    Bundle bundle = make_bundle(primary, ascii("x"));

    SUBCASE("wrong version") {
        Bytes wire = encode_bundle(bundle);
        CHECK(wire[2] == 0x07);
        wire[2] = 0x06;
        CHECK_THROWS_AS(decode_bundle(wire), MalformedBundle);
    }
    SUBCASE("fragment") {
        bundle.primary.flags |= bundle_flags::is_fragment;
        CHECK_THROWS_AS(decode_bundle(encode_bundle(bundle)), MalformedBundle);
    }
    SUBCASE("two custody blocks") {
        bundle.add_extension(make_cteb_block({0, 0, {1, 0}}));
        bundle.add_extension(make_cteb_block({1, 0, {1, 0}}));
        CHECK_THROWS_AS(validate_bundle(bundle), MalformedBundle);
    }
    SUBCASE("not an indefinite array") {
        CHECK_THROWS_AS(decode_bundle(from_hex("80")), MalformedBundle);
        CHECK_THROWS_AS(decode_bundle({}), MalformedBundle);
    }
}

TEST_CASE("every single-bit flip is detected") {
    PrimaryBlock primary;
    primary.destination = {50, 1};
    primary.source = {10, 1};
    Bundle bundle = make_bundle(primary, ascii("payload"));
    bundle.add_extension(make_cteb_block({3, 0, {10, 0}}));
    const Bytes wire = encode_bundle(bundle);
    for (std::size_t i = 0; i < wire.size(); ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            Bytes corrupt = wire;
            corrupt[i] ^= static_cast<std::uint8_t>(1U << bit);
            bool rejected = false;
            try {
                rejected = decode_bundle(corrupt) != bundle;
            } catch (const Error&) {
                rejected = true;
            }
            CHECK_MESSAGE(rejected, "byte " << i << " bit " << bit);
        }
    }
}

TEST_CASE("crc16 blocks verify and detect corruption") {
    PrimaryBlock primary;
    primary.crc_type = CrcType::crc16;
    primary.destination = {2, 1};
    primary.source = {1, 1};
    Bundle bundle = make_bundle(primary, ascii("abc"));
    bundle.blocks.back().crc_type = CrcType::crc16;
    Bytes wire = encode_bundle(bundle);
    CHECK(decode_bundle(wire) == bundle);
    wire[wire.size() - 6] ^= 0x01; // inside the payload bytes
    CHECK_THROWS_AS(decode_bundle(wire), CrcMismatch);
}

TEST_CASE("random bundles re-encode identically") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const Bundle bundle = testing::random_bundle(rng);
        const Bytes wire = encode_bundle(bundle);
        const Bundle decoded = decode_bundle(wire);
        REQUIRE(decoded == bundle);
        REQUIRE(encode_bundle(decoded) == wire);
    }
}
