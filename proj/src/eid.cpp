#include "bprel/eid.hpp"

#include "bprel/errors.hpp"

#include <charconv>

namespace bprel {

std::string EndpointId::str() const {
    return "ipn:" + std::to_string(node) + "." + std::to_string(service);
}

namespace {

std::uint64_t parse_number(std::string_view text, std::string_view whole) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
        throw MalformedEid("bad ipn EID '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

EndpointId parse_eid(std::string_view text) {
    constexpr std::string_view kPrefix = "ipn:";
    if (!text.starts_with(kPrefix)) {
        throw MalformedEid("only ipn EIDs are supported: '" + std::string(text) + "'");
    }
    const std::string_view body = text.substr(kPrefix.size());
    const auto dot = body.find('.');
    if (dot == std::string_view::npos) {
        throw MalformedEid("ipn EID needs <node>.<service>: '" + std::string(text) + "'");
    }
    return {parse_number(body.substr(0, dot), text), parse_number(body.substr(dot + 1), text)};
}

void encode_eid(cbor::Writer& out, const EndpointId& eid) {
    out.array(2);
    out.uint(EndpointId::kIpnSchemeCode);
    out.array(2);
    out.uint(eid.node);
    out.uint(eid.service);
}

Bytes encode_eid(const EndpointId& eid) {
    cbor::Writer out;
    encode_eid(out, eid);
    return out.take();
}

EndpointId decode_eid(cbor::Reader& in) {
    try {
        if (in.read_definite_array() != 2) {
            throw MalformedEid("EID must be a 2-element array");
        }
        const std::uint64_t scheme = in.read_uint();
        if (scheme != EndpointId::kIpnSchemeCode) {
            throw MalformedEid("unsupported EID scheme code " + std::to_string(scheme));
        }
        if (in.read_definite_array() != 2) {
            throw MalformedEid("ipn SSP must be a 2-element array");
        }
        EndpointId eid;
        eid.node = in.read_uint();
        eid.service = in.read_uint();
        return eid;
    } catch (const MalformedCbor& e) {
        throw MalformedEid(std::string("malformed EID: ") + e.what());
    }
}

EndpointId decode_eid(ByteView bytes) {
    cbor::Reader in(bytes);
    EndpointId eid = decode_eid(in);
    if (!in.at_end()) {
        throw MalformedEid("trailing bytes after EID");
    }
    return eid;
}

} // namespace bprel
