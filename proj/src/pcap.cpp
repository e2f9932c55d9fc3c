#include "dnp3ids/pcap.hpp"

#include "dnp3ids/util.hpp"

#include <array>
#include <cstring>

namespace dnp3ids::pcap {

using namespace util;

namespace {

std::uint32_t swap32(std::uint32_t v) {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
}

void put32le(std::uint8_t* p, std::uint32_t v) {
    p[0] = v & 0xFF;
    p[1] = (v >> 8) & 0xFF;
    p[2] = (v >> 16) & 0xFF;
    p[3] = (v >> 24) & 0xFF;
}

} // namespace

PcapReader::PcapReader(const std::string& path) : file_(path, std::ios::binary) {
    if (!file_) throw IoFailure("cannot open " + path);
    in_ = &file_;
    read_global_header();
}

PcapReader::PcapReader(std::istream& stream) : in_(&stream) { read_global_header(); }

void PcapReader::read_global_header() {
    std::array<std::uint8_t, 24> hdr;
    in_->read(reinterpret_cast<char*>(hdr.data()), hdr.size());
    if (in_->gcount() != static_cast<std::streamsize>(hdr.size())) throw BadMagic{};
    const std::uint32_t magic = rd32le(hdr.data());
    if (magic == kMagicNative) {
        swapped_ = false;
    } else if (magic == kMagicSwapped) {
        swapped_ = true;
    } else {
        throw BadMagic{};
    }
    link_type_ = rd32le(&hdr[20]);
    if (swapped_) link_type_ = swap32(link_type_);
}

std::optional<CaptureRecord> PcapReader::next() {
    std::array<std::uint8_t, 16> rh;
    in_->read(reinterpret_cast<char*>(rh.data()), rh.size());
    if (in_->gcount() == 0) return std::nullopt;  // clean EOF
    if (in_->gcount() != static_cast<std::streamsize>(rh.size())) throw TruncatedRecord{};

    std::uint32_t ts_sec = rd32le(&rh[0]);
    std::uint32_t ts_usec = rd32le(&rh[4]);
    std::uint32_t incl_len = rd32le(&rh[8]);
    if (swapped_) {
        ts_sec = swap32(ts_sec);
        ts_usec = swap32(ts_usec);
        incl_len = swap32(incl_len);
    }
    CaptureRecord rec;
    rec.ts_us = static_cast<std::uint64_t>(ts_sec) * 1000000 + ts_usec;
    rec.data.resize(incl_len);
    if (incl_len) {
        in_->read(reinterpret_cast<char*>(rec.data.data()), incl_len);
        if (in_->gcount() != static_cast<std::streamsize>(incl_len)) throw TruncatedRecord{};
    }
    return rec;
}

PcapWriter::PcapWriter(const std::string& path, std::uint32_t link_type)
    : file_(path, std::ios::binary) {
    if (!file_) throw IoFailure("cannot open " + path);
    out_ = &file_;
    std::array<std::uint8_t, 24> hdr{};
    put32le(&hdr[0], kMagicNative);
    hdr[4] = 2;   // version 2.4
    hdr[6] = 4;
    put32le(&hdr[16], 65535);  // snaplen
    put32le(&hdr[20], link_type);
    out_->write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
}

PcapWriter::PcapWriter(std::ostream& stream, std::uint32_t link_type) : out_(&stream) {
    std::array<std::uint8_t, 24> hdr{};
    put32le(&hdr[0], kMagicNative);
    hdr[4] = 2;
    hdr[6] = 4;
    put32le(&hdr[16], 65535);
    put32le(&hdr[20], link_type);
    out_->write(reinterpret_cast<const char*>(hdr.data()), hdr.size());
}

void PcapWriter::write(const CaptureRecord& record) {
    std::array<std::uint8_t, 16> rh;
    put32le(&rh[0], static_cast<std::uint32_t>(record.ts_us / 1000000));
    put32le(&rh[4], static_cast<std::uint32_t>(record.ts_us % 1000000));
    put32le(&rh[8], static_cast<std::uint32_t>(record.data.size()));
    put32le(&rh[12], static_cast<std::uint32_t>(record.data.size()));
    out_->write(reinterpret_cast<const char*>(rh.data()), rh.size());
    if (!record.data.empty())
        out_->write(reinterpret_cast<const char*>(record.data.data()), record.data.size());
    if (!*out_) throw IoFailure("short write");
}

void PcapWriter::flush() { out_->flush(); }

std::vector<CaptureRecord> read_capture(const std::string& path) {
    PcapReader reader(path);
    std::vector<CaptureRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

void write_capture(const std::vector<CaptureRecord>& records, const std::string& path) {
    PcapWriter writer(path);
    for (const auto& r : records) writer.write(r);
    writer.flush();
}

} // namespace dnp3ids::pcap
