#include "bprel/admin_record.hpp"

#include "bprel/errors.hpp"
#include "bprel/signal_draft.hpp"

namespace bprel {

const char* to_string(FlushTrigger trigger) noexcept {
    switch (trigger) {
    case FlushTrigger::bundle_count: return "count";
    case FlushTrigger::pending_time: return "age";
    case FlushTrigger::forced: return "forced";
    }
    return "?";
}

Bytes encode_admin_record(std::uint64_t type_code, ByteView content) {
    cbor::Writer out;
    out.array(2);
    out.uint(type_code);
    out.raw(content);
    return out.take();
}

AdminRecord decode_admin_record(ByteView payload) {
    try {
        cbor::Reader in(payload);
        if (in.read_definite_array() != 2) {
            throw MalformedSignal("administrative record must be a 2-element array");
        }
        AdminRecord record;
        record.type_code = in.read_uint();
        const ByteView content = in.read_raw_item();
        record.content.assign(content.begin(), content.end());
        in.expect_end();
        return record;
    } catch (const MalformedSignal&) {
        throw;
    } catch (const Error& e) {
        throw MalformedSignal(std::string("malformed administrative record: ") + e.what());
    }
}

} // namespace bprel
