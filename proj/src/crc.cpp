#include "bprel/crc.hpp"

#include <boost/crc.hpp>

namespace bprel {

std::uint16_t crc16_x25(ByteView data) {
    boost::crc_optimal<16, 0x1021, 0xFFFF, 0xFFFF, true, true> crc;
    crc.process_bytes(data.data(), data.size());
    return crc.checksum();
}

std::uint32_t crc32c(ByteView data) {
    boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
    crc.process_bytes(data.data(), data.size());
    return crc.checksum();
}

} // namespace bprel
