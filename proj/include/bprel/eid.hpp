#pragma once

#include "bprel/cbor.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace bprel {

/// An ipn-scheme endpoint identifier. The dtn scheme is not supported, so
/// the scheme is implicit.
struct EndpointId {
    static constexpr std::uint64_t kIpnSchemeCode = 2;

    std::uint64_t node = 0;
    std::uint64_t service = 0;

    /// The node's administrative endpoint (service 0).
    constexpr EndpointId admin() const noexcept { return {node, 0}; }
    constexpr bool is_admin() const noexcept { return service == 0; }
    constexpr bool is_null() const noexcept { return node == 0 && service == 0; }

    std::string str() const;

    friend constexpr auto operator<=>(const EndpointId&, const EndpointId&) = default;
};

/// Parses `ipn:<node>.<service>`. Throws MalformedEid.
EndpointId parse_eid(std::string_view text);

/// `[2, [node, service]]`.
void encode_eid(cbor::Writer& out, const EndpointId& eid);
Bytes encode_eid(const EndpointId& eid);

/// Throws MalformedEid for anything but a well-formed ipn EID.
EndpointId decode_eid(cbor::Reader& in);
EndpointId decode_eid(ByteView bytes);

} // namespace bprel
