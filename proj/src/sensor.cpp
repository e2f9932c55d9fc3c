#include "dnp3ids/sensor.hpp"

#include <algorithm>
#include <chrono>

namespace dnp3ids::dist {

SensorUplink::SensorUplink(UplinkConfig cfg, ApplyFn apply)
    : cfg_(std::move(cfg)), apply_(std::move(apply)) {}

SensorUplink::~SensorUplink() { stop(); }

void SensorUplink::start() {
    stop_ = false;
    thread_ = std::thread([this] { run(); });
}

void SensorUplink::stop() {
    if (stop_.exchange(true)) return;
    {
        std::lock_guard lock(mutex_);
        if (active_stream_) active_stream_->shutdown();
        drained_cv_.notify_all();
    }
    if (thread_.joinable()) thread_.join();
    connected_ = false;
}

void SensorUplink::submit(const rules::Alert& alert) {
    std::lock_guard lock(mutex_);
    spool_.push_back({next_seq_++, alert});
    ++counters_.submitted;
    while (spool_.size() > cfg_.spool_capacity) {
        spool_.pop_front();
        ++counters_.dropped_overflow;
    }
}

bool SensorUplink::wait_drained(int timeout_ms) {
    std::unique_lock lock(mutex_);
    return drained_cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                                [&] { return spool_.empty() || stop_; }) &&
           spool_.empty();
}

UplinkCounters SensorUplink::counters() const {
    std::lock_guard lock(mutex_);
    return counters_;
}

RuleAckMsg SensorUplink::apply_rule_push(const RulePushMsg& push) {
    if (push.version <= rule_version_) return {push.version, "stale"};
    if (sha256_hex(push.rules_text) != push.sha256_hex)
        return {push.version, "checksum_mismatch"};

    rules::VarTable vars;
    std::shared_ptr<rules::RuleSet> rs;
    try {
        vars = vars_from_wire(push.variables);
        rs = std::make_shared<rules::RuleSet>(
            rules::compile_ruleset(push.rules_text, vars, push.version));
    } catch (const std::exception&) {
        return {push.version, "compile_failed"};
    }
    if (apply_) apply_(rs);
    rule_version_ = push.version;
    {
        std::lock_guard lock(mutex_);
        ++counters_.pushes_applied;
    }
    return {push.version, "ok"};
}

bool SensorUplink::connect_and_hello(TcpStream& stream) {
    try {
        stream = TcpStream::connect(cfg_.master_host, cfg_.master_port);
    } catch (const SocketError&) {
        return false;
    }
    HelloMsg hello{cfg_.sensor_id, kProtoVersion, rule_version_, cfg_.token};
    if (!stream.send_all(encode_hello(hello))) return false;

    std::string line;
    if (stream.recv_line(line, 5000) != RecvStatus::line) return false;
    Message m;
    try {
        m = decode_message(line);
    } catch (const WireError&) {
        return false;
    }
    if (m.type != MsgType::ack) return false;

    std::lock_guard lock(mutex_);
    if (m.ack.seq > highest_sent_seq_) {
        // The store remembers an earlier run under this sensor id; continue
        // its numbering or every spooled alert would collide with dedup.
        std::uint64_t base = m.ack.seq;
        for (auto& e : spool_) e.seq = ++base;
        next_seq_ = base + 1;
    } else {
        while (!spool_.empty() && spool_.front().seq <= m.ack.seq) {
            spool_.pop_front();
            ++counters_.acked;
        }
    }
    last_sent_seq_ = m.ack.seq;
    if (spool_.empty()) drained_cv_.notify_all();
    return true;
}

void SensorUplink::handle_line(TcpStream& stream, const std::string& line) {
    Message m;
    try {
        m = decode_message(line);
    } catch (const WireError&) {
        return;
    }
    switch (m.type) {
        case MsgType::ack: {
            std::lock_guard lock(mutex_);
            while (!spool_.empty() && spool_.front().seq <= m.ack.seq) {
                spool_.pop_front();
                ++counters_.acked;
            }
            if (spool_.empty()) drained_cv_.notify_all();
            break;
        }
        case MsgType::rule_push:
            stream.send_all(encode_rule_ack(apply_rule_push(m.rule_push)));
            break;
        case MsgType::ping:
            stream.send_all(encode_ping());
            break;
        default:
            break;
    }
}

void SensorUplink::run() {
    int backoff_ms = cfg_.reconnect_initial_ms;
    while (!stop_) {
        TcpStream stream;
        if (!connect_and_hello(stream)) {
            for (int waited = 0; waited < backoff_ms && !stop_; waited += 50)
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            backoff_ms = std::min(backoff_ms * 2, cfg_.reconnect_max_ms);
            continue;
        }
        backoff_ms = cfg_.reconnect_initial_ms;
        connected_ = true;
        {
            std::lock_guard lock(mutex_);
            ++counters_.reconnects;
            active_stream_ = &stream;
        }

        bool alive = true;
        while (alive && !stop_) {
            std::vector<std::string> outbound;
            {
                std::lock_guard lock(mutex_);
                for (const auto& e : spool_) {
                    if (e.seq <= last_sent_seq_) continue;
                    outbound.push_back(encode_alert({cfg_.sensor_id, e.seq, e.alert, 0}));
                    last_sent_seq_ = e.seq;
                    highest_sent_seq_ = std::max(highest_sent_seq_, e.seq);
                }
            }
            for (const auto& msg : outbound) {
                if (!stream.send_all(msg)) {
                    alive = false;
                    break;
                }
            }
            if (!alive) break;

            std::string line;
            switch (stream.recv_line(line, 20)) {
                case RecvStatus::line:
                    handle_line(stream, line);
                    break;
                case RecvStatus::timeout:
                    break;
                case RecvStatus::closed:
                    alive = false;
                    break;
            }
        }

        connected_ = false;
        {
            std::lock_guard lock(mutex_);
            active_stream_ = nullptr;
        }
        stream.close();
    }
}

} // namespace dnp3ids::dist
