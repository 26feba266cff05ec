#include "bprel/bundle.hpp"

#include "bprel/crc.hpp"
#include "bprel/errors.hpp"

#include <algorithm>
#include <set>

namespace bprel {

std::string BundleId::str() const {
    return source.str() + "/" + std::to_string(creation_time_ms) + "/" + std::to_string(creation_sequence);
}

const CanonicalBlock& Bundle::payload() const {
    if (blocks.empty() || blocks.back().type_code != block_type::payload) {
        throw MalformedBundle("bundle has no trailing payload block");
    }
    return blocks.back();
}

std::vector<const CanonicalBlock*> Bundle::blocks_of_type(std::uint64_t type_code) const {
    std::vector<const CanonicalBlock*> out;
    for (const auto& block : blocks) {
        if (block.type_code == type_code) {
            out.push_back(&block);
        }
    }
    return out;
}

const CanonicalBlock* Bundle::find_block(std::uint64_t type_code) const {
    const auto it = std::find_if(blocks.begin(), blocks.end(),
                                 [&](const CanonicalBlock& b) { return b.type_code == type_code; });
    return it == blocks.end() ? nullptr : &*it;
}

CanonicalBlock* Bundle::find_block(std::uint64_t type_code) {
    const auto it = std::find_if(blocks.begin(), blocks.end(),
                                 [&](const CanonicalBlock& b) { return b.type_code == type_code; });
    return it == blocks.end() ? nullptr : &*it;
}

std::size_t Bundle::count_blocks(std::uint64_t type_code) const {
    return static_cast<std::size_t>(std::count_if(
        blocks.begin(), blocks.end(), [&](const CanonicalBlock& b) { return b.type_code == type_code; }));
}

std::uint64_t Bundle::next_block_number() const {
    std::uint64_t highest = 1;
    for (const auto& block : blocks) {
        highest = std::max(highest, block.number);
    }
    return highest + 1;
}

CanonicalBlock& Bundle::add_extension(CanonicalBlock block) {
    if (block.number == 0) {
        block.number = next_block_number();
    }
    auto position = blocks.end();
    if (!blocks.empty() && blocks.back().type_code == block_type::payload) {
        position = std::prev(blocks.end());
    }
    return *blocks.insert(position, std::move(block));
}

Bundle make_bundle(const PrimaryBlock& primary, ByteView payload) {
    Bundle bundle;
    bundle.primary = primary;
    CanonicalBlock block;
    block.type_code = block_type::payload;
    block.number = 1;
    block.data.assign(payload.begin(), payload.end());
    bundle.blocks.push_back(std::move(block));
    return bundle;
}

void validate_bundle(const Bundle& bundle) {
    if (bundle.count_blocks(block_type::payload) != 1) {
        throw MalformedBundle("bundle must carry exactly one payload block");
    }
    const CanonicalBlock& payload = bundle.blocks.back();
    if (payload.type_code != block_type::payload) {
        throw MalformedBundle("payload block must be the last block");
    }
    if (payload.number != 1) {
        throw MalformedBundle("payload block must have block number 1");
    }
    std::set<std::uint64_t> numbers;
    for (const auto& block : bundle.blocks) {
        if (block.number == 0 || !numbers.insert(block.number).second) {
            throw MalformedBundle("block numbers must be unique and non-zero");
        }
    }
    if (bundle.count_blocks(block_type::cteb) > 1) {
        throw MalformedBundle("at most one custody transfer block per bundle");
    }
    if (bundle.primary.lifetime_ms == 0) {
        throw MalformedBundle("bundle lifetime must be positive");
    }
    if ((bundle.primary.flags & bundle_flags::is_fragment) != 0) {
        throw MalformedBundle("fragmented bundles are not supported");
    }
}

namespace {

std::size_t crc_width(CrcType type) {
    switch (type) {
    case CrcType::none: return 0;
    case CrcType::crc16: return 2;
    case CrcType::crc32c: return 4;
    }
    return 0;
}

CrcType crc_type_from(std::uint64_t value) {
    if (value > 2) {
        throw MalformedBundle("unknown CRC type " + std::to_string(value));
    }
    return static_cast<CrcType>(value);
}

// Computes the CRC over a block encoding whose trailing CRC value bytes are
// zeroed, then writes the big-endian result into those bytes.
void seal_crc(Bytes& block, CrcType type) {
    const std::size_t width = crc_width(type);
    if (width == 0) {
        return;
    }
    const std::size_t at = block.size() - width;
    if (type == CrcType::crc16) {
        const std::uint16_t value = crc16_x25(block);
        block[at] = static_cast<std::uint8_t>(value >> 8);
        block[at + 1] = static_cast<std::uint8_t>(value);
    } else {
        const std::uint32_t value = crc32c(block);
        for (std::size_t i = 0; i < 4; ++i) {
            block[at + i] = static_cast<std::uint8_t>(value >> (24 - 8 * i));
        }
    }
}

void verify_crc(ByteView block, CrcType type, const char* what) {
    const std::size_t width = crc_width(type);
    if (width == 0) {
        return;
    }
    Bytes copy(block.begin(), block.end());
    std::fill(copy.end() - static_cast<std::ptrdiff_t>(width), copy.end(), std::uint8_t{0});
    seal_crc(copy, type);
    if (!std::equal(copy.begin(), copy.end(), block.begin())) {
        throw CrcMismatch(std::string("CRC mismatch in ") + what);
    }
}

void write_crc_placeholder(cbor::Writer& out, CrcType type) {
    const std::size_t width = crc_width(type);
    if (width != 0) {
        const Bytes zeros(width, 0);
        out.bytes(zeros);
    }
}

Bytes encode_primary(const PrimaryBlock& primary) {
    cbor::Writer out;
    out.array(primary.crc_type == CrcType::none ? 8 : 9);
    out.uint(PrimaryBlock::kVersion);
    out.uint(primary.flags);
    out.uint(static_cast<std::uint64_t>(primary.crc_type));
    encode_eid(out, primary.destination);
    encode_eid(out, primary.source);
    encode_eid(out, primary.report_to);
    out.array(2);
    out.uint(primary.creation_time_ms);
    out.uint(primary.creation_sequence);
    out.uint(primary.lifetime_ms);
    write_crc_placeholder(out, primary.crc_type);
    Bytes encoded = out.take();
    seal_crc(encoded, primary.crc_type);
    return encoded;
}

Bytes encode_canonical(const CanonicalBlock& block) {
    cbor::Writer out;
    out.array(block.crc_type == CrcType::none ? 5 : 6);
    out.uint(block.type_code);
    out.uint(block.number);
    out.uint(block.flags);
    out.uint(static_cast<std::uint64_t>(block.crc_type));
    out.bytes(block.data);
    write_crc_placeholder(out, block.crc_type);
    Bytes encoded = out.take();
    seal_crc(encoded, block.crc_type);
    return encoded;
}

void read_crc_field(cbor::Reader& in, CrcType type) {
    const Bytes value = in.read_bytes();
    if (value.size() != crc_width(type)) {
        throw MalformedBundle("CRC field has wrong length");
    }
}

PrimaryBlock decode_primary(ByteView raw) {
    cbor::Reader in(raw);
    const std::uint64_t count = in.read_definite_array();
    if (count < 8) {
        throw MalformedBundle("primary block too short");
    }
    const std::uint64_t version = in.read_uint();
    if (version != PrimaryBlock::kVersion) {
        throw MalformedBundle("unsupported bundle protocol version " + std::to_string(version));
    }
    PrimaryBlock primary;
    primary.flags = in.read_uint();
    if ((primary.flags & bundle_flags::is_fragment) != 0) {
        throw MalformedBundle("fragmented bundles are not supported");
    }
    primary.crc_type = crc_type_from(in.read_uint());
    if (count != (primary.crc_type == CrcType::none ? 8u : 9u)) {
        throw MalformedBundle("primary block has wrong element count");
    }
    primary.destination = decode_eid(in);
    primary.source = decode_eid(in);
    primary.report_to = decode_eid(in);
    if (in.read_definite_array() != 2) {
        throw MalformedBundle("creation timestamp must be a 2-element array");
    }
    primary.creation_time_ms = in.read_uint();
    primary.creation_sequence = in.read_uint();
    primary.lifetime_ms = in.read_uint();
    if (primary.crc_type != CrcType::none) {
        read_crc_field(in, primary.crc_type);
    }
    in.expect_end();
    verify_crc(raw, primary.crc_type, "primary block");
    return primary;
}

CanonicalBlock decode_canonical(ByteView raw) {
    cbor::Reader in(raw);
    const std::uint64_t count = in.read_definite_array();
    if (count < 5) {
        throw MalformedBundle("canonical block too short");
    }
    CanonicalBlock block;
    block.type_code = in.read_uint();
    block.number = in.read_uint();
    block.flags = in.read_uint();
    block.crc_type = crc_type_from(in.read_uint());
    if (count != (block.crc_type == CrcType::none ? 5u : 6u)) {
        throw MalformedBundle("canonical block has wrong element count");
    }
    block.data = in.read_bytes();
    if (block.crc_type != CrcType::none) {
        read_crc_field(in, block.crc_type);
    }
    in.expect_end();
    verify_crc(raw, block.crc_type, "canonical block");
    return block;
}

} // namespace

Bytes encode_bundle(const Bundle& bundle) {
    validate_bundle(bundle);
    cbor::Writer out;
    out.indefinite_array();
    out.raw(encode_primary(bundle.primary));
    for (const auto& block : bundle.blocks) {
        out.raw(encode_canonical(block));
    }
    out.end_indefinite();
    return out.take();
}

Bundle decode_bundle(ByteView bytes) {
    try {
        cbor::Reader in(bytes);
        if (in.read_array().has_value()) {
            throw MalformedBundle("bundle must be an indefinite-length array");
        }
        Bundle bundle;
        bundle.primary = decode_primary(in.read_raw_item());
        while (!in.at_break()) {
            bundle.blocks.push_back(decode_canonical(in.read_raw_item()));
        }
        in.read_break();
        in.expect_end();
        validate_bundle(bundle);
        return bundle;
    } catch (const MalformedBundle&) {
        throw;
    } catch (const Error& e) {
        throw MalformedBundle(std::string("malformed bundle: ") + e.what());
    }
}

} // namespace bprel
