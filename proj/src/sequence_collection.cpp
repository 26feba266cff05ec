#include "bprel/sequence_collection.hpp"

#include "bprel/errors.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace bprel {

std::string BundleSequence::str() const {
    std::string out = "(" + std::to_string(first) + "+" + std::to_string(length) + " " + scope.str();
    if (block_source) {
        out += " src " + block_source->str();
    }
    return out + ")";
}

BundleSequenceCollection coalesce(const std::set<BundleTag>& tags) {
    using GroupKey = std::tuple<std::string, EndpointId, SequenceScope>;
    std::map<GroupKey, std::vector<std::uint64_t>> groups;
    for (const BundleTag& tag : tags) {
        groups[{tag.scope.str(), tag.block_source, tag.scope}].push_back(tag.number);
    }

    BundleSequenceCollection out;
    for (auto& [key, numbers] : groups) {
        const auto& [text, source, scope] = key;
        std::sort(numbers.begin(), numbers.end());
        for (std::size_t i = 0; i < numbers.size();) {
            std::size_t j = i + 1;
            while (j < numbers.size() && numbers[j] == numbers[j - 1] + 1) {
                ++j;
            }
            out.push_back({numbers[i], j - i, scope, source});
            i = j;
        }
    }
    return out;
}

std::set<BundleTag> expand(const BundleSequenceCollection& collection, const EndpointId& receiver_admin,
                           std::uint64_t max_value) {
    std::set<BundleTag> out;
    for (const BundleSequence& sequence : collection) {
        if (sequence.length == 0) {
            throw MalformedSignal("bundle sequence with zero length");
        }
        if (sequence.first > max_value || sequence.length - 1 > max_value - sequence.first) {
            throw SequenceOverflow("bundle sequence " + sequence.str() + " exceeds the maximum sequence number");
        }
        const EndpointId source = sequence.block_source.value_or(receiver_admin);
        for (std::uint64_t offset = 0; offset < sequence.length; ++offset) {
            out.insert({sequence.scope, sequence.first + offset, source});
        }
    }
    return out;
}

void omit_receiver_source(BundleSequenceCollection& collection, const EndpointId& receiver_admin) {
    for (BundleSequence& sequence : collection) {
        if (sequence.block_source == receiver_admin) {
            sequence.block_source.reset();
        }
    }
}

void omit_all_sources(BundleSequenceCollection& collection) {
    for (BundleSequence& sequence : collection) {
        sequence.block_source.reset();
    }
}

void encode_collection(cbor::Writer& out, const BundleSequenceCollection& collection) {
    out.array(collection.size());
    for (const BundleSequence& sequence : collection) {
        out.array(sequence.block_source ? 4 : 3);
        out.uint(sequence.first);
        out.uint(sequence.length);
        if (sequence.scope.is_per_destination()) {
            encode_eid(out, sequence.scope.destination());
        } else {
            out.uint(sequence.scope.wire_id());
        }
        if (sequence.block_source) {
            encode_eid(out, *sequence.block_source);
        }
    }
}

BundleSequenceCollection decode_collection(cbor::Reader& in) {
    try {
        const std::uint64_t count = in.read_definite_array();
        if (count > in.remaining()) {
            throw MalformedSignal("collection length exceeds input");
        }
        BundleSequenceCollection out;
        out.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint64_t fields = in.read_definite_array();
            if (fields != 3 && fields != 4) {
                throw MalformedSignal("bundle sequence must have 3 or 4 elements");
            }
            BundleSequence sequence;
            sequence.first = in.read_uint();
            sequence.length = in.read_uint();
            if (sequence.length == 0) {
                throw MalformedSignal("bundle sequence with zero length");
            }
            if (in.peek_major() == cbor::Major::unsigned_int) {
                const std::uint64_t id = in.read_uint();
                if (id == 0) {
                    throw MalformedSignal("sequence ID 0 must be sent as a destination EID");
                }
                sequence.scope = SequenceScope::explicit_id(id);
            } else {
                sequence.scope = SequenceScope::per_destination(decode_eid(in));
            }
            if (fields == 4) {
                sequence.block_source = decode_eid(in);
            }
            out.push_back(std::move(sequence));
        }
        return out;
    } catch (const MalformedSignal&) {
        throw;
    } catch (const Error& e) {
        throw MalformedSignal(std::string("malformed bundle sequence: ") + e.what());
    }
}

} // namespace bprel
