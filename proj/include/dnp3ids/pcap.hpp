#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnp3ids::pcap {

struct CaptureRecord {
    std::uint64_t ts_us = 0;          // microseconds since epoch
    std::vector<std::uint8_t> data;   // raw link-layer octets

    bool operator==(const CaptureRecord&) const = default;
};

struct PcapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : PcapError {
    BadMagic() : PcapError("not a pcap file (bad magic)") {}
};
struct TruncatedRecord : PcapError {
    TruncatedRecord() : PcapError("pcap record truncated") {}
};
struct IoFailure : PcapError {
    explicit IoFailure(const std::string& what) : PcapError("pcap I/O failure: " + what) {}
};

constexpr std::uint32_t kMagicNative = 0xA1B2C3D4;
constexpr std::uint32_t kMagicSwapped = 0xD4C3B2A1;

// Streaming reader; both byte orders accepted, microsecond timestamps only.
class PcapReader {
public:
    explicit PcapReader(const std::string& path);
    explicit PcapReader(std::istream& stream);

    std::optional<CaptureRecord> next();
    std::uint32_t link_type() const { return link_type_; }

private:
    void read_global_header();

    std::ifstream file_;
    std::istream* in_ = nullptr;
    bool swapped_ = false;
    std::uint32_t link_type_ = 1;
};

class PcapWriter {
public:
    explicit PcapWriter(const std::string& path, std::uint32_t link_type = 1);
    explicit PcapWriter(std::ostream& stream, std::uint32_t link_type = 1);
    void write(const CaptureRecord& record);
    void flush();

private:
    std::ofstream file_;
    std::ostream* out_ = nullptr;
};

std::vector<CaptureRecord> read_capture(const std::string& path);
void write_capture(const std::vector<CaptureRecord>& records, const std::string& path);

} // namespace dnp3ids::pcap
