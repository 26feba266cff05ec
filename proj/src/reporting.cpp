#include "bprel/reporting.hpp"

#include "bprel/errors.hpp"

namespace bprel {

const char* to_string(ReportReason reason) noexcept {
    switch (reason) {
    case ReportReason::reception: return "reception";
    case ReportReason::forwarding: return "forwarding";
    case ReportReason::delivery: return "delivery";
    case ReportReason::deletion: return "deletion";
    }
    return "unknown";
}

ReportReason parse_report_reason(std::string_view name) {
    for (const auto reason : {ReportReason::reception, ReportReason::forwarding, ReportReason::delivery,
                              ReportReason::deletion}) {
        if (name == to_string(reason)) {
            return reason;
        }
    }
    throw Error("unknown report reason '" + std::string(name) + "'");
}

ReportTypes ReportTypes::of(std::initializer_list<ReportReason> reasons) {
    std::uint64_t mask = 0;
    for (const ReportReason reason : reasons) {
        mask |= std::uint64_t{1} << static_cast<std::uint64_t>(reason);
    }
    return ReportTypes(mask);
}

std::string ReportTypes::str() const {
    if (mask_ == 0) {
        return "none";
    }
    std::string out;
    for (std::uint64_t bit = 0; bit < 64; ++bit) {
        if (((mask_ >> bit) & 1U) == 0) {
            continue;
        }
        if (!out.empty()) {
            out += "|";
        }
        out += bit <= 3 ? to_string(static_cast<ReportReason>(bit)) : "bit" + std::to_string(bit);
    }
    return out;
}

ReportTypes parse_report_types(std::string_view text) {
    if (text == "none" || text.empty()) {
        return {};
    }
    std::uint64_t mask = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t bar = std::min(text.find('|', start), text.size());
        mask |= std::uint64_t{1} << static_cast<std::uint64_t>(parse_report_reason(text.substr(start, bar - start)));
        start = bar + 1;
    }
    return ReportTypes(mask);
}

Bytes encode_creb(const CrebData& creb) {
    // Each field requires all earlier ones.
    const bool present[] = {creb.sequence_id.has_value(), creb.report_types.has_value(),
                            creb.block_source.has_value(), creb.report_endpoint.has_value()};
    std::size_t length = 1;
    bool gap = false;
    for (const bool field : present) {
        if (field) {
            if (gap) {
                throw PrefixViolation("CREB field present without all preceding fields");
            }
            ++length;
        } else {
            gap = true;
        }
    }

    cbor::Writer out;
    out.array(length);
    out.uint(creb.sequence_number);
    if (length > 1) out.uint(*creb.sequence_id);
    if (length > 2) out.uint(creb.report_types->mask());
    if (length > 3) encode_eid(out, *creb.block_source);
    if (length > 4) encode_eid(out, *creb.report_endpoint);
    return out.take();
}

CrebData decode_creb(ByteView bytes) {
    try {
        cbor::Reader in(bytes);
        const std::uint64_t length = in.read_definite_array();
        if (length < 1 || length > 5) {
            throw MalformedBlock("CREB must be an array of 1 to 5 elements");
        }
        CrebData creb;
        creb.sequence_number = in.read_uint();
        if (length > 1) creb.sequence_id = in.read_uint();
        if (length > 2) creb.report_types = ReportTypes(in.read_uint());
        if (length > 3) creb.block_source = decode_eid(in);
        if (length > 4) creb.report_endpoint = decode_eid(in);
        in.expect_end();
        return creb;
    } catch (const MalformedBlock&) {
        throw;
    } catch (const Error& e) {
        throw MalformedBlock(std::string("malformed CREB: ") + e.what());
    }
}

CanonicalBlock make_creb_block(const CrebData& creb) {
    CanonicalBlock block;
    block.type_code = block_type::creb;
    block.crc_type = CrcType::crc32c;
    block.data = encode_creb(creb);
    return block;
}

EndpointId resolve_report_destination(const CrebData& creb, const PrimaryBlock& primary) {
    if (creb.report_endpoint) {
        return *creb.report_endpoint;
    }
    if (creb.block_source) {
        return *creb.block_source;
    }
    return primary.source;
}

ResolvedCreb resolve_creb(const CrebData& creb, const PrimaryBlock& primary) {
    ResolvedCreb out;
    out.tag = derive_tag(creb.sequence_id, creb.sequence_number, creb.block_source, primary);
    out.report_types = creb.report_types.value_or(ReportTypes{});
    out.report_destination = resolve_report_destination(creb, primary);
    return out;
}

std::vector<ResolvedCreb> resolved_crebs(const Bundle& bundle) {
    std::vector<ResolvedCreb> out;
    for (const CanonicalBlock* block : bundle.blocks_of_type(block_type::creb)) {
        out.push_back(resolve_creb(decode_creb(block->data), bundle.primary));
    }
    return out;
}

Bytes build_crs(const CrsSignal& signal) {
    cbor::Writer content;
    content.map(signal.entries.size());
    for (const auto& [reason, tags] : signal.entries) {
        content.uint(reason);
        BundleSequenceCollection collection = coalesce(tags);
        omit_receiver_source(collection, signal.destination.admin());
        encode_collection(content, collection);
    }
    return encode_admin_record(admin_record_type::crs, content.data());
}

std::map<std::uint64_t, BundleSequenceCollection> decode_crs(ByteView record) {
    const AdminRecord envelope = decode_admin_record(record);
    if (envelope.type_code != admin_record_type::crs) {
        throw MalformedSignal("not a compressed reporting signal (record type " +
                              std::to_string(envelope.type_code) + ")");
    }
    try {
        cbor::Reader in(envelope.content);
        if (in.peek_major() != cbor::Major::map) {
            throw MalformedSignal("CRS content must be a CBOR map");
        }
        const std::uint64_t count = in.read_map();
        std::map<std::uint64_t, BundleSequenceCollection> out;
        for (std::uint64_t i = 0; i < count; ++i) {
            if (in.peek_major() != cbor::Major::unsigned_int) {
                throw MalformedSignal("CRS keys must be unsigned integers");
            }
            const std::uint64_t reason = in.read_uint();
            if (!out.emplace(reason, decode_collection(in)).second) {
                throw MalformedSignal("duplicate report reason in CRS");
            }
        }
        in.expect_end();
        return out;
    } catch (const MalformedSignal&) {
        throw;
    } catch (const Error& e) {
        throw MalformedSignal(std::string("malformed CRS: ") + e.what());
    }
}

CrsContents parse_crs(ByteView record, const EndpointId& receiver_admin) {
    CrsContents out;
    for (const auto& [reason, collection] : decode_crs(record)) {
        out[reason] = expand(collection, receiver_admin);
    }
    return out;
}

std::set<std::uint64_t> detect_gaps(const std::set<BundleTag>& reported, const SequenceScope& scope,
                                    std::uint64_t lo, std::uint64_t hi) {
    std::set<std::uint64_t> seen;
    for (const BundleTag& tag : reported) {
        if (tag.scope == scope && tag.number >= lo && tag.number <= hi) {
            seen.insert(tag.number);
        }
    }
    std::set<std::uint64_t> missing;
    for (std::uint64_t number = lo;; ++number) {
        if (!seen.contains(number)) {
            missing.insert(number);
        }
        if (number == hi) {
            break;
        }
    }
    return missing;
}

ReportingAgent::ReportingAgent(const EndpointId& self_admin, FlushPolicy policy)
    : self_admin_(self_admin.admin()), drafts_(policy) {}

RecordOutcome ReportingAgent::record_event(const Bundle& bundle, ReportReason event, SimTime now) {
    RecordOutcome outcome;
    for (const ResolvedCreb& creb : resolved_crebs(bundle)) {
        if (creb.tag.block_source == self_admin_ || !creb.report_types.requests(event)) {
            continue;
        }
        outcome.recorded.push_back({creb.tag, event, creb.report_destination});
        auto flushed = drafts_.add(creb.report_destination, static_cast<std::uint64_t>(event), creb.tag, now);
        if (flushed) {
            outcome.flushed.push_back(std::move(*flushed));
        }
    }
    return outcome;
}

} // namespace bprel
