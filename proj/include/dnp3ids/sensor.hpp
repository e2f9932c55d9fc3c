#pragma once

#include "dnp3ids/rules.hpp"
#include "dnp3ids/sockio.hpp"
#include "dnp3ids/wire.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace dnp3ids::dist {

struct UplinkConfig {
    std::string sensor_id;
    std::string master_host = "127.0.0.1";
    std::uint16_t master_port = kDefaultMasterPort;
    std::string token;
    std::size_t spool_capacity = 10000;
    int reconnect_initial_ms = 200;
    int reconnect_max_ms = 5000;
};

struct UplinkCounters {
    std::uint64_t submitted = 0;
    std::uint64_t acked = 0;
    std::uint64_t dropped_overflow = 0;
    std::uint64_t reconnects = 0;
    std::uint64_t pushes_applied = 0;
};

// Sensor side of the alert channel: alerts queue to a bounded spool and are
// shipped over one persistent connection; unacked entries survive reconnects
// and are resent. Rule pushes arriving on the same connection are verified,
// compiled, and handed to `apply` (the pipeline swap).
class SensorUplink {
public:
    using ApplyFn = std::function<void(std::shared_ptr<const rules::RuleSet>)>;

    SensorUplink(UplinkConfig cfg, ApplyFn apply);
    ~SensorUplink();

    void start();
    void stop();

    // Thread-safe; called from the pipeline's alert sink.
    void submit(const rules::Alert& alert);

    // Blocks until every submitted alert is acked (or timeout). False on
    // timeout or when the uplink is stopped first.
    bool wait_drained(int timeout_ms);

    // Verify + compile + apply one push; the wire path calls this, and tests
    // can call it directly. Never throws: failures come back in the ack.
    RuleAckMsg apply_rule_push(const RulePushMsg& push);

    void set_rule_version(std::uint64_t v) { rule_version_ = v; }
    std::uint64_t rule_version() const { return rule_version_; }
    bool connected() const { return connected_; }
    UplinkCounters counters() const;

private:
    struct SpoolEntry {
        std::uint64_t seq;
        rules::Alert alert;
    };

    void run();
    bool connect_and_hello(TcpStream& stream);
    void handle_line(TcpStream& stream, const std::string& line);

    UplinkConfig cfg_;
    ApplyFn apply_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> connected_{false};
    std::atomic<std::uint64_t> rule_version_{0};
    std::thread thread_;
    TcpStream* active_stream_ = nullptr; // guarded by mutex_, for stop()

    mutable std::mutex mutex_;
    std::condition_variable drained_cv_;
    std::deque<SpoolEntry> spool_; // unacked alerts, seq ascending
    std::uint64_t next_seq_ = 1;
    std::uint64_t last_sent_seq_ = 0;
    std::uint64_t highest_sent_seq_ = 0;
    UplinkCounters counters_;
};

} // namespace dnp3ids::dist
