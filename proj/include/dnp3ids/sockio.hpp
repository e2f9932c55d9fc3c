#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dnp3ids::dist {

struct SocketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RecvStatus { line, timeout, closed };

// Blocking TCP stream carrying newline-delimited text. Hosts are numeric
// IPv4 addresses ("localhost" accepted as an alias for 127.0.0.1).
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    static TcpStream connect(const std::string& host, std::uint16_t port);

    bool valid() const { return fd_ >= 0; }
    void close();
    void shutdown(); // unblocks a reader on another thread

    // Sends the whole buffer; false on error or peer close.
    bool send_all(const std::string& data);

    // Reads one '\n'-terminated line (returned without the newline).
    // timeout_ms < 0 blocks indefinitely.
    RecvStatus recv_line(std::string& out, int timeout_ms = -1);

private:
    int fd_ = -1;
    std::string buf_;
};

class TcpListener {
public:
    // port 0 binds an ephemeral port; read it back with port().
    explicit TcpListener(std::uint16_t port, const std::string& bind_addr = "0.0.0.0");
    TcpListener(TcpListener&&) noexcept;
    TcpListener(const TcpListener&) = delete;
    ~TcpListener();

    std::optional<TcpStream> accept(int timeout_ms = -1);
    std::uint16_t port() const { return port_; }
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

} // namespace dnp3ids::dist
