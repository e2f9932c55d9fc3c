#include "dnp3ids/sockio.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <utility>

namespace dnp3ids::dist {

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    const std::string resolved = host == "localhost" ? "127.0.0.1" : host;
    if (inet_pton(AF_INET, resolved.c_str(), &addr.sin_addr) != 1)
        throw SocketError("not an IPv4 address: " + host);
    return addr;
}

int poll_one(int fd, short events, int timeout_ms) {
    pollfd p{fd, events, 0};
    int rc;
    do {
        rc = ::poll(&p, 1, timeout_ms);
    } while (rc < 0 && errno == EINTR);
    return rc;
}

} // namespace

TcpStream::TcpStream(TcpStream&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), buf_(std::move(other.buf_)) {}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
        buf_ = std::move(other.buf_);
    }
    return *this;
}

TcpStream::~TcpStream() { close(); }

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port) {
    sockaddr_in addr = make_addr(host, port);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw SocketError(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        int err = errno;
        ::close(fd);
        throw SocketError("connect " + host + ":" + std::to_string(port) + ": " +
                          std::strerror(err));
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpStream(fd);
}

void TcpStream::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    buf_.clear();
}

void TcpStream::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

bool TcpStream::send_all(const std::string& data) {
    if (fd_ < 0) return false;
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        if (n == 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

RecvStatus TcpStream::recv_line(std::string& out, int timeout_ms) {
    using clock = std::chrono::steady_clock;
    const auto deadline = timeout_ms < 0
                              ? clock::time_point::max()
                              : clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        if (auto nl = buf_.find('\n'); nl != std::string::npos) {
            out = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            return RecvStatus::line;
        }
        if (fd_ < 0) return RecvStatus::closed;

        int wait_ms = -1;
        if (timeout_ms >= 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                              clock::now());
            if (left.count() <= 0) return RecvStatus::timeout;
            wait_ms = static_cast<int>(left.count());
        }
        int rc = poll_one(fd_, POLLIN, wait_ms);
        if (rc == 0) return RecvStatus::timeout;
        if (rc < 0) return RecvStatus::closed;

        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            return RecvStatus::closed;
        }
        if (n == 0) return RecvStatus::closed; // torn partial line is dropped
        buf_.append(chunk, static_cast<std::size_t>(n));
    }
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_addr) {
    sockaddr_in addr = make_addr(bind_addr, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw SocketError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd_, 16) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw SocketError("bind " + bind_addr + ":" + std::to_string(port) + ": " +
                          std::strerror(err));
    }
    sockaddr_in actual{};
    socklen_t len = sizeof actual;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&actual), &len) == 0)
        port_ = ntohs(actual.sin_port);
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<TcpStream> TcpListener::accept(int timeout_ms) {
    if (fd_ < 0) return std::nullopt;
    int rc = poll_one(fd_, POLLIN, timeout_ms);
    if (rc <= 0) return std::nullopt;
    int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) return std::nullopt;
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpStream(client);
}

} // namespace dnp3ids::dist
