#pragma once

// Random generators and reference models shared by the unit, property and
// acceptance tests.

#include "bprel/custody.hpp"
#include "bprel/reporting.hpp"
#include "bprel/sequence_collection.hpp"

#include <map>
#include <random>
#include <set>
#include <tuple>

namespace bprel::testing {

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline EndpointId random_eid(std::mt19937_64& rng) {
    // Mix small and wide numbers so every CBOR head length shows up.
    const auto number = [&] {
        switch (pick(rng, 0, 3)) {
        case 0: return pick(rng, 0, 23);
        case 1: return pick(rng, 24, 255);
        case 2: return pick(rng, 256, 70000);
        default: return pick(rng, 0, std::numeric_limits<std::uint64_t>::max());
        }
    };
    return {number(), number()};
}

inline SequenceScope random_scope(std::mt19937_64& rng) {
    if (pick(rng, 0, 1) == 0) {
        return SequenceScope::explicit_id(pick(rng, 1, 40));
    }
    return SequenceScope::per_destination({pick(rng, 1, 30), pick(rng, 0, 3)});
}

/// Up to `max_tags` tags spread over a few (scope, block source) groups,
/// drawn as runs with holes so both long and single-number sequences occur.
inline std::set<BundleTag> random_tag_set(std::mt19937_64& rng, std::size_t max_tags) {
    std::set<BundleTag> tags;
    const std::size_t target = pick(rng, 0, max_tags);
    const std::size_t groups = pick(rng, 1, 4);
    std::vector<std::pair<SequenceScope, EndpointId>> keys;
    for (std::size_t g = 0; g < groups; ++g) {
        keys.emplace_back(random_scope(rng), EndpointId{pick(rng, 1, 5), 0});
    }
    while (tags.size() < target) {
        const auto& [scope, source] = keys[pick(rng, 0, keys.size() - 1)];
        const std::uint64_t start = pick(rng, 0, 4 * max_tags + 10);
        const std::uint64_t length = pick(rng, 1, 30);
        for (std::uint64_t n = start; n < start + length && tags.size() < target; ++n) {
            tags.insert({scope, n, source});
        }
    }
    return tags;
}

/// Brute-force run-length encoder: number of maximal runs over all groups.
inline std::size_t reference_run_count(const std::set<BundleTag>& tags) {
    std::map<std::tuple<SequenceScope, EndpointId>, std::vector<std::uint64_t>> groups;
    for (const BundleTag& tag : tags) {
        groups[{tag.scope, tag.block_source}].push_back(tag.number);
    }
    std::size_t runs = 0;
    for (auto& [key, numbers] : groups) {
        std::sort(numbers.begin(), numbers.end());
        for (std::size_t i = 0; i < numbers.size(); ++i) {
            if (i == 0 || numbers[i] != numbers[i - 1] + 1) {
                ++runs;
            }
        }
    }
    return runs;
}

inline CrebData random_creb(std::mt19937_64& rng) {
    CrebData creb;
    creb.sequence_number = pick(rng, 0, kDefaultSequenceMax);
    const std::uint64_t fields = pick(rng, 0, 4);
    if (fields >= 1) creb.sequence_id = pick(rng, 0, 1000);
    if (fields >= 2) creb.report_types = ReportTypes(pick(rng, 0, 15));
    if (fields >= 3) creb.block_source = random_eid(rng).admin();
    if (fields >= 4) creb.report_endpoint = random_eid(rng);
    return creb;
}

inline CtebData random_cteb(std::mt19937_64& rng) {
    return {pick(rng, 0, kDefaultSequenceMax), pick(rng, 0, 1000), random_eid(rng).admin()};
}

inline Bundle random_bundle(std::mt19937_64& rng) {
    PrimaryBlock primary;
    const CrcType crcs[] = {CrcType::none, CrcType::crc16, CrcType::crc32c};
    primary.crc_type = crcs[pick(rng, 0, 2)];
    primary.flags = pick(rng, 0, 1) ? bundle_flags::must_not_fragment : 0;
    primary.destination = random_eid(rng);
    primary.source = random_eid(rng);
    primary.report_to = pick(rng, 0, 1) ? random_eid(rng) : EndpointId{};
    primary.creation_time_ms = pick(rng, 0, std::uint64_t{1} << 40);
    primary.creation_sequence = pick(rng, 0, 1000);
    primary.lifetime_ms = pick(rng, 1, 86'400'000);
    Bytes payload(pick(rng, 0, 300));
    for (auto& byte : payload) {
        byte = static_cast<std::uint8_t>(pick(rng, 0, 255));
    }
    Bundle bundle = make_bundle(primary, payload);
    bundle.blocks.back().crc_type = crcs[pick(rng, 0, 2)];
    for (std::uint64_t i = pick(rng, 0, 2); i > 0; --i) {
        CanonicalBlock block = make_creb_block(random_creb(rng));
        block.crc_type = crcs[pick(rng, 0, 2)];
        bundle.add_extension(block);
    }
    if (pick(rng, 0, 1)) {
        bundle.add_extension(make_cteb_block(random_cteb(rng)));
    }
    return bundle;
}

template <typename Key>
FlushedSignal<Key> random_signal(std::mt19937_64& rng, const std::vector<Key>& keys, std::size_t max_tags) {
    FlushedSignal<Key> signal;
    signal.destination = random_eid(rng);
    for (const Key& key : keys) {
        if (pick(rng, 0, 2) != 0) {
            auto tags = random_tag_set(rng, max_tags);
            if (!tags.empty()) {
                signal.entries[key] = std::move(tags);
            }
        }
    }
    return signal;
}

} // namespace bprel::testing
