#include "bprel/cbor.hpp"

#include "bprel/errors.hpp"

#include <limits>
#include <sstream>

namespace bprel::cbor {

namespace {

constexpr std::uint8_t kIndefinite = 31;
constexpr std::uint8_t kBreak = 0xff;
constexpr int kMaxDepth = 64;

std::uint8_t initial_byte(Major major, std::uint8_t info) {
    return static_cast<std::uint8_t>((static_cast<std::uint8_t>(major) << 5) | info);
}

} // namespace

void Writer::head(Major major, std::uint64_t argument) {
    if (argument < 24) {
        out_.push_back(initial_byte(major, static_cast<std::uint8_t>(argument)));
    } else if (argument <= 0xff) {
        out_.push_back(initial_byte(major, 24));
        out_.push_back(static_cast<std::uint8_t>(argument));
    } else if (argument <= 0xffff) {
        out_.push_back(initial_byte(major, 25));
        for (int shift = 8; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(argument >> shift));
        }
    } else if (argument <= 0xffffffffULL) {
        out_.push_back(initial_byte(major, 26));
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(argument >> shift));
        }
    } else {
        out_.push_back(initial_byte(major, 27));
        for (int shift = 56; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(argument >> shift));
        }
    }
}

void Writer::uint(std::uint64_t value) { head(Major::unsigned_int, value); }

void Writer::integer(std::int64_t value) {
    if (value >= 0) {
        head(Major::unsigned_int, static_cast<std::uint64_t>(value));
    } else {
        // -1 - value never overflows for negative int64.
        head(Major::negative_int, static_cast<std::uint64_t>(-(value + 1)));
    }
}

void Writer::bytes(ByteView data) {
    head(Major::byte_string, data.size());
    out_.insert(out_.end(), data.begin(), data.end());
}

void Writer::text(std::string_view data) {
    head(Major::text_string, data.size());
    out_.insert(out_.end(), data.begin(), data.end());
}

void Writer::array(std::uint64_t count) { head(Major::array, count); }

void Writer::map(std::uint64_t count) { head(Major::map, count); }

void Writer::indefinite_array() { out_.push_back(initial_byte(Major::array, kIndefinite)); }

void Writer::end_indefinite() { out_.push_back(kBreak); }

void Writer::raw(ByteView encoded) { out_.insert(out_.end(), encoded.begin(), encoded.end()); }

std::uint8_t Reader::next_byte() {
    if (at_end()) {
        throw MalformedCbor("truncated CBOR input");
    }
    return in_[pos_++];
}

Major Reader::peek_major() const {
    if (at_end()) {
        throw MalformedCbor("truncated CBOR input");
    }
    return static_cast<Major>(in_[pos_] >> 5);
}

bool Reader::at_break() const { return !at_end() && in_[pos_] == kBreak; }

std::uint64_t Reader::read_argument(std::uint8_t info) {
    if (info < 24) {
        return info;
    }
    int length = 0;
    switch (info) {
    case 24: length = 1; break;
    case 25: length = 2; break;
    case 26: length = 4; break;
    case 27: length = 8; break;
    default: throw MalformedCbor("unsupported additional information " + std::to_string(info));
    }
    std::uint64_t value = 0;
    for (int i = 0; i < length; ++i) {
        value = (value << 8) | next_byte();
    }
    // Shortest-form rule: anything that fits a shorter head is rejected.
    const bool minimal = (length == 1 && value >= 24) || (length == 2 && value > 0xff) ||
                         (length == 4 && value > 0xffff) || (length == 8 && value > 0xffffffffULL);
    if (!minimal) {
        throw MalformedCbor("non-minimal integer encoding");
    }
    return value;
}

std::uint64_t Reader::read_head(Major expected) {
    const std::uint8_t initial = next_byte();
    const auto major = static_cast<Major>(initial >> 5);
    if (major != expected) {
        --pos_;
        throw MalformedCbor("unexpected CBOR major type " + std::to_string(initial >> 5) +
                            ", wanted " + std::to_string(static_cast<int>(expected)));
    }
    const std::uint8_t info = initial & 0x1f;
    if (info == kIndefinite) {
        throw MalformedCbor("unexpected indefinite-length item");
    }
    return read_argument(info);
}

std::uint64_t Reader::read_uint() { return read_head(Major::unsigned_int); }

std::int64_t Reader::read_int() {
    const Major major = peek_major();
    if (major == Major::unsigned_int) {
        const std::uint64_t value = read_uint();
        if (value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            throw MalformedCbor("integer out of int64 range");
        }
        return static_cast<std::int64_t>(value);
    }
    const std::uint64_t magnitude = read_head(Major::negative_int);
    if (magnitude > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw MalformedCbor("integer out of int64 range");
    }
    return -1 - static_cast<std::int64_t>(magnitude);
}

Bytes Reader::read_bytes() {
    const std::uint64_t length = read_head(Major::byte_string);
    if (length > remaining()) {
        throw MalformedCbor("byte string exceeds input");
    }
    Bytes out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
              in_.begin() + static_cast<std::ptrdiff_t>(pos_ + length));
    pos_ += length;
    return out;
}

std::string Reader::read_text() {
    const std::uint64_t length = read_head(Major::text_string);
    if (length > remaining()) {
        throw MalformedCbor("text string exceeds input");
    }
    std::string out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                    in_.begin() + static_cast<std::ptrdiff_t>(pos_ + length));
    pos_ += length;
    return out;
}

std::optional<std::uint64_t> Reader::read_array() {
    if (!at_end() && in_[pos_] == initial_byte(Major::array, kIndefinite)) {
        ++pos_;
        return std::nullopt;
    }
    return read_head(Major::array);
}

std::uint64_t Reader::read_definite_array() { return read_head(Major::array); }

std::uint64_t Reader::read_map() { return read_head(Major::map); }

void Reader::read_break() {
    if (next_byte() != kBreak) {
        --pos_;
        throw MalformedCbor("expected break");
    }
}

void Reader::skip_item(int depth) {
    if (depth > kMaxDepth) {
        throw MalformedCbor("CBOR nesting too deep");
    }
    const std::uint8_t initial = next_byte();
    const auto major = static_cast<Major>(initial >> 5);
    const std::uint8_t info = initial & 0x1f;
    if (info == kIndefinite) {
        if (major == Major::array || major == Major::map) {
            while (!at_break()) {
                skip_item(depth + 1);
                if (major == Major::map) {
                    skip_item(depth + 1);
                }
            }
            read_break();
            return;
        }
        throw MalformedCbor("unsupported indefinite-length item");
    }
    if (major == Major::simple) {
        // Simple values and floats carry their payload in the argument.
        if (info == 25 || info == 26 || info == 27) {
            const std::size_t width = info == 25 ? 2 : info == 26 ? 4 : 8;
            if (width > remaining()) {
                throw MalformedCbor("truncated float");
            }
            pos_ += width;
            return;
        }
        if (info == 24) {
            next_byte();
        } else if (info > 24) {
            throw MalformedCbor("reserved simple value");
        }
        return;
    }
    const std::uint64_t argument = read_argument(info);
    switch (major) {
    case Major::unsigned_int:
    case Major::negative_int:
        return;
    case Major::byte_string:
    case Major::text_string:
        if (argument > remaining()) {
            throw MalformedCbor("string exceeds input");
        }
        pos_ += argument;
        return;
    case Major::array:
        for (std::uint64_t i = 0; i < argument; ++i) {
            skip_item(depth + 1);
        }
        return;
    case Major::map:
        for (std::uint64_t i = 0; i < argument * 2; ++i) {
            skip_item(depth + 1);
        }
        return;
    case Major::tag:
        skip_item(depth + 1);
        return;
    case Major::simple:
        return;
    }
}

ByteView Reader::read_raw_item() {
    const std::size_t start = pos_;
    skip_item(0);
    return in_.subspan(start, pos_ - start);
}

void Reader::expect_end() const {
    if (!at_end()) {
        throw MalformedCbor("trailing bytes after CBOR item");
    }
}

namespace {

void diagnose(Reader& reader, std::ostringstream& out, int depth) {
    if (depth > kMaxDepth) {
        throw MalformedCbor("CBOR nesting too deep");
    }
    switch (reader.peek_major()) {
    case Major::unsigned_int:
        out << reader.read_uint();
        return;
    case Major::negative_int:
        out << reader.read_int();
        return;
    case Major::byte_string:
        out << "h'" << to_hex(reader.read_bytes()) << "'";
        return;
    case Major::text_string:
        out << '"' << reader.read_text() << '"';
        return;
    case Major::array: {
        const auto count = reader.read_array();
        out << (count ? "[" : "[_ ");
        bool first = true;
        for (std::uint64_t i = 0; count ? i < *count : !reader.at_break(); ++i) {
            if (!first) {
                out << ", ";
            }
            first = false;
            diagnose(reader, out, depth + 1);
        }
        if (!count) {
            reader.read_break();
        }
        out << "]";
        return;
    }
    case Major::map: {
        const std::uint64_t count = reader.read_map();
        out << "{";
        for (std::uint64_t i = 0; i < count; ++i) {
            if (i != 0) {
                out << ", ";
            }
            diagnose(reader, out, depth + 1);
            out << ": ";
            diagnose(reader, out, depth + 1);
        }
        out << "}";
        return;
    }
    case Major::tag:
    case Major::simple: {
        const ByteView raw = reader.read_raw_item();
        out << "<raw h'" << to_hex(raw) << "'>";
        return;
    }
    }
}

} // namespace

std::string diagnostic(ByteView encoded) {
    Reader reader(encoded);
    std::ostringstream out;
    diagnose(reader, out, 0);
    reader.expect_end();
    return out.str();
}

} // namespace bprel::cbor

namespace bprel {

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (const std::uint8_t byte : data) {
        out.push_back(kDigits[byte >> 4]);
        out.push_back(kDigits[byte & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view text) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    int high = -1;
    for (const char c : text) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            continue;
        }
        const int value = nibble(c);
        if (value < 0) {
            throw Error(std::string("invalid hex character '") + c + "'");
        }
        if (high < 0) {
            high = value;
        } else {
            out.push_back(static_cast<std::uint8_t>((high << 4) | value));
            high = -1;
        }
    }
    if (high >= 0) {
        throw Error("odd number of hex digits");
    }
    return out;
}

} // namespace bprel
