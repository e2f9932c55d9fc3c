#include "dnp3ids/master.hpp"

#include <chrono>

namespace dnp3ids::dist {

namespace {

std::uint64_t wall_clock_us() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

} // namespace

MasterNode::MasterNode(MasterConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.store_dir) {}

MasterNode::~MasterNode() { stop(); }

void MasterNode::start() {
    listener_ = std::make_unique<TcpListener>(cfg_.port, cfg_.bind_addr);
    port_ = listener_->port();
    stop_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void MasterNode::stop() {
    if (stop_.exchange(true)) return;
    if (listener_) listener_->close();
    {
        std::lock_guard lock(conn_threads_mutex_);
        for (auto& conn : open_conns_) conn->stream.shutdown();
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(conn_threads_mutex_);
        threads.swap(conn_threads_);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

void MasterNode::accept_loop() {
    while (!stop_) {
        auto stream = listener_->accept(200);
        if (!stream) continue;
        auto conn = std::make_shared<Conn>();
        conn->stream = std::move(*stream);
        std::lock_guard lock(conn_threads_mutex_);
        if (stop_) return;
        open_conns_.push_back(conn);
        conn_threads_.emplace_back([this, conn] { serve(conn); });
    }
}

bool MasterNode::send_to(Conn& conn, const std::string& line) {
    std::lock_guard lock(conn.write_mutex);
    return conn.stream.send_all(line);
}

RulePushMsg MasterNode::current_push_locked() const {
    RulePushMsg push;
    push.version = version_;
    push.rules_text = rules_text_;
    push.variables = vars_to_wire(rules_vars_);
    push.sha256_hex = rules_sha_;
    return push;
}

void MasterNode::serve(std::shared_ptr<Conn> conn) {
    {
        std::lock_guard lock(state_mutex_);
        ++stats_.connections_accepted;
    }

    std::string line;
    if (conn->stream.recv_line(line, 5000) != RecvStatus::line) {
        conn->stream.close();
        return;
    }
    Message hello;
    try {
        hello = decode_message(line);
    } catch (const WireError&) {
        conn->stream.close();
        return;
    }
    bool token_ok = cfg_.token.empty() || hello.hello.token == cfg_.token;
    if (hello.type != MsgType::hello || hello.hello.proto_ver != kProtoVersion ||
        !token_ok) {
        std::lock_guard lock(state_mutex_);
        ++stats_.handshake_mismatches;
        conn->stream.close();
        return;
    }

    const std::string sensor_id = hello.hello.sensor_id;
    conn->sensor_id = sensor_id;
    bool send_push = false;
    RulePushMsg push;
    {
        std::lock_guard lock(state_mutex_);
        registry_[sensor_id].conn = conn;
        if (have_rules_ && hello.hello.rule_version < version_) {
            send_push = true;
            push = current_push_locked();
        }
    }

    send_to(*conn, encode_ack({store_.last_contiguous_seq(sensor_id)}));
    if (send_push) send_to(*conn, encode_rule_push(push));

    while (!stop_) {
        RecvStatus rs = conn->stream.recv_line(line, 200);
        if (rs == RecvStatus::timeout) continue;
        if (rs == RecvStatus::closed) break;

        Message m;
        try {
            m = decode_message(line);
        } catch (const WireError&) {
            std::lock_guard lock(state_mutex_);
            ++stats_.malformed_lines;
            continue;
        }
        switch (m.type) {
            case MsgType::alert: {
                if (m.alert.sensor_id != sensor_id) {
                    std::lock_guard lock(state_mutex_);
                    ++stats_.malformed_lines;
                    continue;
                }
                m.alert.received_at_us = wall_clock_us();
                bool fresh = store_.append(m.alert);
                {
                    std::lock_guard lock(state_mutex_);
                    if (fresh)
                        ++stats_.alerts_ingested;
                    else
                        ++stats_.duplicates_ignored;
                }
                send_to(*conn, encode_ack({store_.last_contiguous_seq(sensor_id)}));
                break;
            }
            case MsgType::rule_ack: {
                std::lock_guard lock(state_mutex_);
                auto& reg = registry_[sensor_id];
                reg.acked_rule_version = m.rule_ack.version;
                reg.last_rule_status = m.rule_ack.status;
                acks_cv_.notify_all();
                break;
            }
            case MsgType::ping:
                send_to(*conn, encode_ping());
                break;
            case MsgType::hello:
                send_to(*conn, encode_ack({store_.last_contiguous_seq(sensor_id)}));
                break;
            default:
                break;
        }
    }

    conn->stream.close();
    {
        std::lock_guard lock(conn_threads_mutex_);
        std::erase(open_conns_, conn);
    }
    std::lock_guard lock(state_mutex_);
    auto it = registry_.find(sensor_id);
    if (it != registry_.end() && it->second.conn == conn) it->second.conn.reset();
}

void MasterNode::set_rules(const std::string& rules_text, const rules::VarTable& vars) {
    std::lock_guard lock(state_mutex_);
    try {
        rules::compile_ruleset(rules_text, vars, version_);
    } catch (const rules::RuleError& e) {
        throw CompileFailedAtMaster(e.what());
    }
    rules_text_ = rules_text;
    rules_vars_ = vars;
    rules_sha_ = sha256_hex(rules_text);
    have_rules_ = true;
}

std::map<std::string, std::string> MasterNode::push_rules(const std::string& rules_text,
                                                          const rules::VarTable& vars) {
    std::uint64_t new_version;
    std::vector<std::pair<std::string, std::shared_ptr<Conn>>> targets;
    RulePushMsg push;
    {
        std::lock_guard lock(state_mutex_);
        new_version = version_ + 1;
        try {
            rules::compile_ruleset(rules_text, vars, new_version);
        } catch (const rules::RuleError& e) {
            throw CompileFailedAtMaster(e.what());
        }
        version_ = new_version;
        rules_text_ = rules_text;
        rules_vars_ = vars;
        rules_sha_ = sha256_hex(rules_text);
        have_rules_ = true;
        push = current_push_locked();
        for (auto& [id, reg] : registry_) targets.emplace_back(id, reg.conn);
    }

    std::map<std::string, std::string> result;
    std::vector<std::string> waiting;
    for (auto& [id, conn] : targets) {
        if (!conn) {
            result[id] = "pending";
            continue;
        }
        if (send_to(*conn, encode_rule_push(push)))
            waiting.push_back(id);
        else
            result[id] = "pending";
    }

    std::unique_lock lock(state_mutex_);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(cfg_.push_ack_timeout_ms);
    for (const auto& id : waiting) {
        acks_cv_.wait_until(lock, deadline, [&] {
            return registry_[id].acked_rule_version >= new_version || stop_;
        });
        auto& reg = registry_[id];
        result[id] = reg.acked_rule_version >= new_version ? reg.last_rule_status
                                                           : "timeout";
    }
    return result;
}

std::uint64_t MasterNode::rule_version() const {
    std::lock_guard lock(state_mutex_);
    return version_;
}

std::vector<SensorStatus> MasterNode::sensors() const {
    std::lock_guard lock(state_mutex_);
    std::vector<SensorStatus> out;
    for (const auto& [id, reg] : registry_) {
        SensorStatus s;
        s.sensor_id = id;
        s.connected = reg.conn != nullptr;
        s.last_contiguous_seq = store_.last_contiguous_seq(id);
        s.acked_rule_version = reg.acked_rule_version;
        s.last_rule_status = reg.last_rule_status;
        out.push_back(std::move(s));
    }
    return out;
}

MasterStats MasterNode::stats() const {
    std::lock_guard lock(state_mutex_);
    return stats_;
}

} // namespace dnp3ids::dist
