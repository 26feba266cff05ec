#include "bprel/sequence.hpp"

#include "bprel/errors.hpp"

#include <charconv>

namespace bprel {

SequenceScope SequenceScope::explicit_id(std::uint64_t id) {
    if (id == 0) {
        throw Error("sequence ID 0 is reserved for per-destination sequences");
    }
    SequenceScope scope;
    scope.id_ = id;
    return scope;
}

SequenceScope SequenceScope::per_destination(const EndpointId& destination) {
    SequenceScope scope;
    scope.destination_ = destination;
    return scope;
}

SequenceScope SequenceScope::from_wire(std::uint64_t id, const EndpointId& destination) {
    return id == 0 ? per_destination(destination) : explicit_id(id);
}

std::string SequenceScope::str() const {
    return is_per_destination() ? "dst:" + destination_.str() : "id:" + std::to_string(id_);
}

std::string BundleTag::str() const {
    return block_source.str() + "/" + scope.str() + "#" + std::to_string(number);
}

SequenceScope parse_scope(std::string_view text) {
    if (text.starts_with("dst:")) {
        return SequenceScope::per_destination(parse_eid(text.substr(4)));
    }
    if (text.starts_with("id:")) {
        const std::string_view digits = text.substr(3);
        std::uint64_t id = 0;
        const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
        if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
            throw Error("bad sequence scope '" + std::string(text) + "'");
        }
        return SequenceScope::explicit_id(id);
    }
    throw Error("bad sequence scope '" + std::string(text) + "'");
}

BundleTag parse_tag(std::string_view text) {
    const auto slash = text.find('/');
    const auto hash = text.rfind('#');
    if (slash == std::string_view::npos || hash == std::string_view::npos || hash < slash) {
        throw Error("bad bundle tag '" + std::string(text) + "'");
    }
    BundleTag tag;
    tag.block_source = parse_eid(text.substr(0, slash));
    tag.scope = parse_scope(text.substr(slash + 1, hash - slash - 1));
    const std::string_view digits = text.substr(hash + 1);
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tag.number);
    if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
        throw Error("bad bundle tag '" + std::string(text) + "'");
    }
    return tag;
}

SequenceCounterTable::SequenceCounterTable(std::uint64_t max_value) : max_value_(max_value) {}

std::uint64_t SequenceCounterTable::next(const SequenceScope& scope) {
    std::uint64_t& counter = counters_[scope];
    const std::uint64_t issued = counter;
    counter = issued == max_value_ ? 0 : issued + 1;
    return issued;
}

std::uint64_t SequenceCounterTable::peek(const SequenceScope& scope) const {
    const auto it = counters_.find(scope);
    return it == counters_.end() ? 0 : it->second;
}

BundleTag derive_tag(std::optional<std::uint64_t> scope_field, std::uint64_t sequence_number,
                     const std::optional<EndpointId>& block_source_field, const PrimaryBlock& primary) {
    BundleTag tag;
    tag.scope = SequenceScope::from_wire(scope_field.value_or(0), primary.destination);
    tag.number = sequence_number;
    tag.block_source = block_source_field.value_or(primary.source).admin();
    return tag;
}

} // namespace bprel
