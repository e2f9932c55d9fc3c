#include "dnp3ids/store.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <filesystem>

namespace dnp3ids::dist {

namespace fs = std::filesystem;

namespace {

auto order_key(const AlertRecord& r) {
    return std::tie(r.alert.ts_us, r.sensor_id, r.seq);
}

bool record_less(const AlertRecord& a, const AlertRecord& b) {
    return order_key(a) < order_key(b);
}

} // namespace

AlertStore::AlertStore(const std::string& directory) : dir_(directory) {
    fs::create_directories(dir_);
    load();
}

std::string AlertStore::segment_path(std::uint64_t ts_us) const {
    std::time_t secs = static_cast<std::time_t>(ts_us / 1'000'000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char name[48];
    std::snprintf(name, sizeof name, "alerts-%04d%02d%02d.jsonl", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return (fs::path(dir_) / name).string();
}

void AlertStore::load() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("alerts-") &&
            name.ends_with(".jsonl"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw StoreError("cannot open segment: " + path.string());
        std::string line;
        while (true) {
            const std::streamoff line_start = in.tellg();
            if (!std::getline(in, line)) break;
            if (in.eof()) {
                // final line without trailing newline: torn append. Drop it and
                // cut the file back so the next append starts on a clean line.
                in.close();
                std::error_code ec;
                fs::resize_file(path, static_cast<std::uintmax_t>(line_start), ec);
                break;
            }
            if (line.empty()) continue;
            Message m;
            try {
                m = decode_message(line);
            } catch (const WireError&) {
                continue; // skip corrupt lines, keep the readable prefix
            }
            if (m.type != MsgType::alert) continue;
            if (!seen_.insert({m.alert.sensor_id, m.alert.seq}).second) continue;
            records_.push_back(std::move(m.alert));
        }
    }
    std::sort(records_.begin(), records_.end(), record_less);
}

bool AlertStore::append(const AlertRecord& record) {
    std::lock_guard lock(mutex_);
    if (!seen_.insert({record.sensor_id, record.seq}).second) return false;

    const std::string path = segment_path(record.alert.ts_us);
    auto it = segments_.find(path);
    if (it == segments_.end()) {
        std::ofstream out(path, std::ios::app);
        if (!out) throw StoreError("cannot append to segment: " + path);
        it = segments_.emplace(path, std::move(out)).first;
    }
    it->second << encode_alert(record);
    it->second.flush();

    auto pos = std::upper_bound(records_.begin(), records_.end(), record, record_less);
    records_.insert(pos, record);
    return true;
}

std::vector<AlertRecord> AlertStore::query(const StoreQuery& q) const {
    std::lock_guard lock(mutex_);
    std::vector<AlertRecord> out;
    for (const auto& r : records_) {
        if (q.from_ts_us && r.alert.ts_us < *q.from_ts_us) continue;
        if (q.to_ts_us && r.alert.ts_us > *q.to_ts_us) continue;
        if (q.sensor_id && r.sensor_id != *q.sensor_id) continue;
        if (q.sid && r.alert.sid != *q.sid) continue;
        if (q.gid && r.alert.gid != *q.gid) continue;
        out.push_back(r);
        if (q.limit != 0 && out.size() >= q.limit) break;
    }
    return out;
}

std::size_t AlertStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::uint64_t AlertStore::last_contiguous_seq(const std::string& sensor_id) const {
    std::lock_guard lock(mutex_);
    std::uint64_t last = 0;
    // seen_ is ordered, so the sensor's seqs iterate ascending
    for (auto it = seen_.lower_bound({sensor_id, 0});
         it != seen_.end() && it->first == sensor_id; ++it) {
        if (it->second == last + 1)
            last = it->second;
        else if (it->second > last + 1)
            break;
    }
    return last;
}

std::set<std::string> AlertStore::sensors() const {
    std::lock_guard lock(mutex_);
    std::set<std::string> out;
    for (const auto& [sensor, seq] : seen_) out.insert(sensor);
    return out;
}

} // namespace dnp3ids::dist
