#pragma once

#include "dnp3ids/wire.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dnp3ids::dist {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StoreQuery {
    std::optional<std::uint64_t> from_ts_us; // inclusive
    std::optional<std::uint64_t> to_ts_us;   // inclusive
    std::optional<std::string> sensor_id;
    std::optional<std::uint32_t> sid;
    std::optional<std::uint32_t> gid;
    std::size_t limit = 0;                   // 0 = unlimited
};

// Append-only alert log: one JSON line per record, segmented into
// alerts-YYYYMMDD.jsonl files by the alert timestamp. The in-memory index
// is rebuilt at open; a torn final line (crash mid-append) is dropped.
class AlertStore {
public:
    explicit AlertStore(const std::string& directory);

    // Returns false when (sensor_id, seq) is already stored.
    bool append(const AlertRecord& record);

    std::vector<AlertRecord> query(const StoreQuery& q) const;

    std::size_t size() const;
    std::uint64_t last_contiguous_seq(const std::string& sensor_id) const;
    std::set<std::string> sensors() const;

private:
    void load();
    std::string segment_path(std::uint64_t ts_us) const;

    std::string dir_;
    mutable std::mutex mutex_;
    std::vector<AlertRecord> records_;            // (ts, sensor, seq) sorted
    std::set<std::pair<std::string, std::uint64_t>> seen_;
    std::map<std::string, std::ofstream> segments_;
};

} // namespace dnp3ids::dist
