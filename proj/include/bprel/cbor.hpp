#pragma once

// Minimal CBOR (RFC 8949) support: exactly the subset BPv7 and the
// reporting/custody extensions need. Integers are always written in their
// shortest form and the reader rejects anything longer, so every decoded
// item re-encodes to the same bytes.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bprel {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

namespace cbor {

enum class Major : std::uint8_t {
    unsigned_int = 0,
    negative_int = 1,
    byte_string = 2,
    text_string = 3,
    array = 4,
    map = 5,
    tag = 6,
    simple = 7,
};

class Writer {
public:
    void uint(std::uint64_t value);
    /// Signed integer; negative values use major type 1.
    void integer(std::int64_t value);
    void bytes(ByteView data);
    void text(std::string_view data);
    void array(std::uint64_t count);
    void map(std::uint64_t count);
    void indefinite_array();
    void end_indefinite();
    /// Appends an already-encoded CBOR item verbatim.
    void raw(ByteView encoded);

    const Bytes& data() const noexcept { return out_; }
    Bytes take() noexcept { return std::move(out_); }
    std::size_t size() const noexcept { return out_.size(); }

private:
    void head(Major major, std::uint64_t argument);

    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView input) noexcept : in_(input) {}
    Reader(Bytes&&) = delete;

    bool at_end() const noexcept { return pos_ >= in_.size(); }
    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return in_.size() - pos_; }

    /// Major type of the next item; throws MalformedCbor at end of input.
    Major peek_major() const;
    bool at_break() const;

    std::uint64_t read_uint();
    /// Accepts major types 0 and 1 within the int64 range.
    std::int64_t read_int();
    Bytes read_bytes();
    std::string read_text();
    /// Definite length, or nullopt for an indefinite-length array.
    std::optional<std::uint64_t> read_array();
    std::uint64_t read_definite_array();
    std::uint64_t read_map();
    void read_break();

    /// Skips one complete item (nested arrays/maps included) and returns
    /// its encoded bytes.
    ByteView read_raw_item();

    /// Throws MalformedCbor unless all input has been consumed.
    void expect_end() const;

private:
    std::uint8_t next_byte();
    std::uint64_t read_argument(std::uint8_t info);
    std::uint64_t read_head(Major expected);
    void skip_item(int depth);

    ByteView in_;
    std::size_t pos_ = 0;
};

/// RFC 8949 diagnostic notation of a single encoded item, e.g.
/// `[2, [21, 1]]` or `h'0102'`.
std::string diagnostic(ByteView encoded);

} // namespace cbor

std::string to_hex(ByteView data);
/// Accepts upper/lower case and ignores whitespace; throws Error on odd
/// length or non-hex characters.
Bytes from_hex(std::string_view text);

} // namespace bprel
