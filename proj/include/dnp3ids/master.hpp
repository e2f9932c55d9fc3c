#pragma once

#include "dnp3ids/sockio.hpp"
#include "dnp3ids/store.hpp"
#include "dnp3ids/wire.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dnp3ids::dist {

struct MasterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CompileFailedAtMaster : MasterError {
    using MasterError::MasterError;
};

struct MasterConfig {
    std::string bind_addr = "0.0.0.0";
    std::uint16_t port = kDefaultMasterPort;
    std::string store_dir = "alert-store";
    std::string token;           // when set, hellos must carry it
    int push_ack_timeout_ms = 5000;
};

struct SensorStatus {
    std::string sensor_id;
    bool connected = false;
    std::uint64_t last_contiguous_seq = 0;
    std::uint64_t acked_rule_version = 0;
    std::string last_rule_status;
};

struct MasterStats {
    std::uint64_t connections_accepted = 0;
    std::uint64_t handshake_mismatches = 0;
    std::uint64_t malformed_lines = 0;
    std::uint64_t alerts_ingested = 0;
    std::uint64_t duplicates_ignored = 0;
};

// Ingest + storage + rule-push service. One thread per sensor connection;
// store appends are serialized inside AlertStore.
class MasterNode {
public:
    explicit MasterNode(MasterConfig cfg);
    ~MasterNode();

    void start();
    void stop();

    std::uint16_t port() const { return port_; }
    AlertStore& store() { return store_; }
    const AlertStore& store() const { return store_; }

    // Installs the ruleset the master considers current without contacting
    // sensors (startup path). Throws CompileFailedAtMaster.
    void set_rules(const std::string& rules_text, const rules::VarTable& vars);

    // Compiles, bumps the version, sends to every connected sensor and waits
    // for their acks. Returns sensor_id -> status; sensors that are known
    // but offline are reported "pending" and receive the set on reconnect.
    // Throws CompileFailedAtMaster.
    std::map<std::string, std::string> push_rules(const std::string& rules_text,
                                                  const rules::VarTable& vars);

    std::uint64_t rule_version() const;
    std::vector<SensorStatus> sensors() const;
    MasterStats stats() const;

private:
    struct Conn {
        TcpStream stream;
        std::mutex write_mutex;
        std::string sensor_id;
    };
    struct SensorReg {
        std::shared_ptr<Conn> conn; // null while offline
        std::uint64_t acked_rule_version = 0;
        std::string last_rule_status;
    };

    void accept_loop();
    void serve(std::shared_ptr<Conn> conn);
    bool send_to(Conn& conn, const std::string& line);
    RulePushMsg current_push_locked() const;

    MasterConfig cfg_;
    AlertStore store_;
    std::uint16_t port_ = 0;

    std::unique_ptr<TcpListener> listener_;
    std::atomic<bool> stop_{false};
    std::thread accept_thread_;
    std::mutex conn_threads_mutex_;
    std::vector<std::thread> conn_threads_;
    std::vector<std::shared_ptr<Conn>> open_conns_;

    mutable std::mutex state_mutex_;
    std::condition_variable acks_cv_;
    std::map<std::string, SensorReg> registry_;
    std::uint64_t version_ = 1;
    std::string rules_text_;
    std::string rules_sha_;
    rules::VarTable rules_vars_;
    bool have_rules_ = false;
    MasterStats stats_;
};

} // namespace dnp3ids::dist
