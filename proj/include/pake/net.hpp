#pragma once

// Blocking TCP transport and the demo server/client loops.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "pake/handshake.hpp"

namespace pake::net {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

inline Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
    throw std::invalid_argument("expected HOST:PORT, got '" + s + "'");
  Endpoint ep;
  ep.host = s.substr(0, colon);
  if (ep.host.size() > 2 && ep.host.front() == '[' && ep.host.back() == ']') ep.host = ep.host.substr(1, ep.host.size() - 2);
  const std::string port = s.substr(colon + 1);
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || v > 65535) throw std::invalid_argument("bad port '" + port + "'");
  ep.port = static_cast<std::uint16_t>(v);
  return ep;
}

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void set_timeout(int seconds) {
    timeval tv{seconds, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  }

  void write_all(ByteView data) {
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw TransportError(std::string("send: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  /// False on EOF before the first byte; throws on EOF mid-buffer.
  bool read_exact(std::span<std::uint8_t> out) {
    std::size_t off = 0;
    while (off < out.size()) {
      ssize_t n = ::recv(fd_, out.data() + off, out.size() - off, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw TransportError(std::string("recv: ") + std::strerror(errno));
      if (n == 0) {
        if (off == 0) return false;
        throw TransportError("connection closed mid-frame");
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

 private:
  int fd_ = -1;
};

/// One complete frame (header + payload) or nullopt on clean EOF. Content is not validated here.
inline std::optional<Bytes> read_frame(Socket& s) {
  Bytes frame(kFrameHeaderSize);
  if (!s.read_exact(frame)) return std::nullopt;
  const std::size_t len = *frame_payload_length(frame);
  frame.resize(kFrameHeaderSize + len);
  if (len > 0 && !s.read_exact(std::span(frame).subspan(kFrameHeaderSize)))
    throw TransportError("connection closed mid-frame");
  return frame;
}

inline Socket connect_tcp(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw TransportError(std::string("resolve: ") + ::gai_strerror(rc));
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
  std::string last = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    last = std::strerror(errno);
  }
  throw TransportError("connect " + ep.host + ":" + port + ": " + last);
}

class Listener {
 public:
  explicit Listener(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(ep.port);
    const char* host = ep.host.empty() || ep.host == "*" ? nullptr : ep.host.c_str();
    if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0)
      throw TransportError(std::string("resolve: ") + ::gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
    std::string last = "no addresses";
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!s.valid()) continue;
      int one = 1;
      ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0) {
        sock_ = std::move(s);
        return;
      }
      last = std::strerror(errno);
    }
    throw TransportError("bind " + ep.host + ":" + port + ": " + last);
  }

  std::uint16_t port() const {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  }

  Socket accept() {
    for (;;) {
      int fd = ::accept(sock_.fd(), nullptr, nullptr);
      if (fd >= 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return Socket(fd);
      }
      if (errno != EINTR && errno != ECONNABORTED) throw TransportError(std::string("accept: ") + std::strerror(errno));
    }
  }

 private:
  Socket sock_;
};

/// Exit codes shared by the client and server entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAuthFailure = 2;
inline constexpr int kExitProtocolError = 3;

/// Serialises appends to a transcript file across sessions.
class TranscriptLog {
 public:
  explicit TranscriptLog(std::string path) : path_(std::move(path)) {}

  void append(std::string_view header, const std::vector<TranscriptEntry>& entries, std::string_view result) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    out << header << '\n';
    for (const auto& e : entries) out << (e.outbound ? "send " : "recv ") << to_hex(e.frame) << '\n';
    out << result << '\n';
  }

 private:
  std::string path_;
  std::mutex mu_;
};

/// Runs one handshake to completion over a connected socket.
inline void drive(Handshake& hs, Socket& sock) {
  try {
    for (const auto& f : hs.begin()) sock.write_all(f);
    while (hs.outcome() == Outcome::Running || (hs.role() == Role::Client && hs.outcome() == Outcome::Accepted)) {
      auto frame = read_frame(sock);
      if (!frame) {
        hs.peer_closed();
        break;
      }
      for (const auto& f : hs.receive(*frame)) sock.write_all(f);
    }
  } catch (const TransportError&) {
    hs.peer_closed();
  }
}

inline std::string result_line(const Handshake& hs) {
  if (auto key = hs.session_key()) return "ACCEPT " + fingerprint(*key);
  return "REJECT " + std::string(to_string(hs.reason().value_or(RejectReason::Transport)));
}

struct ServerConfig {
  Endpoint listen;
  Group group;
  PasswordExponent password;
  HandshakeOptions options;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_sessions;
  std::optional<std::string> transcript_path;
  int io_timeout_seconds = 30;
};

/// Accept loop; each connection is its own thread. Returns once max_sessions have finished.
inline int run_server(const ServerConfig& cfg, std::ostream& log,
                      const std::function<void(std::uint16_t)>& on_listening = {}) {
  std::optional<Listener> listener;
  try {
    listener.emplace(cfg.listen);
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitProtocolError;
  }
  if (on_listening) on_listening(listener->port());

  std::mutex log_mu;
  std::optional<TranscriptLog> transcript;
  if (cfg.transcript_path) transcript.emplace(*cfg.transcript_path);

  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;
  auto reap = [&](bool all) {
    for (auto it = workers.begin(); it != workers.end();) {
      if (all || it->done->load()) {
        it->thread.join();
        it = workers.erase(it);
      } else {
        ++it;
      }
    }
  };

  for (std::size_t index = 0; !cfg.max_sessions || index < *cfg.max_sessions; ++index) {
    Socket conn;
    try {
      conn = listener->accept();
    } catch (const TransportError& e) {
      std::cerr << "error: " << e.what() << '\n';
      break;
    }
    conn.set_timeout(cfg.io_timeout_seconds);
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread t([&cfg, &log, &log_mu, &transcript, index, done, sock = std::move(conn)]() mutable {
      std::unique_ptr<RandomSource> rng;
      if (cfg.seed) rng = std::make_unique<SeededRandom>(*cfg.seed + index);
      else rng = std::make_unique<SystemRandom>();
      Handshake hs(Role::Server, cfg.group, cfg.password, *rng, cfg.options);
      drive(hs, sock);
      sock.close();
      const std::string line = result_line(hs);
      if (transcript) transcript->append("session " + std::to_string(index), hs.transcript(), line);
      {
        std::lock_guard lock(log_mu);
        log << line << std::endl;
      }
      done->store(true);
    });
    workers.push_back({std::move(t), std::move(done)});
    reap(false);
  }
  reap(true);
  return kExitOk;
}

struct ClientConfig {
  Endpoint connect;
  Group group;
  PasswordExponent password;
  HandshakeOptions options;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> transcript_path;
  int io_timeout_seconds = 30;
};

/// 0 on mutual authentication, 2 on authentication failure, 3 on protocol or transport errors.
inline int run_client(const ClientConfig& cfg, std::ostream& out) {
  std::unique_ptr<RandomSource> rng;
  if (cfg.seed) rng = std::make_unique<SeededRandom>(*cfg.seed);
  else rng = std::make_unique<SystemRandom>();
  Handshake hs(Role::Client, cfg.group, cfg.password, *rng, cfg.options);
  try {
    Socket sock = connect_tcp(cfg.connect);
    sock.set_timeout(cfg.io_timeout_seconds);
    drive(hs, sock);
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    out << "REJECT transport" << std::endl;
    return kExitProtocolError;
  }
  const std::string line = result_line(hs);
  if (cfg.transcript_path) TranscriptLog(*cfg.transcript_path).append("session 0", hs.transcript(), line);
  out << line << std::endl;
  if (hs.outcome() == Outcome::Accepted) return kExitOk;
  return hs.reason() == RejectReason::Auth ? kExitAuthFailure : kExitProtocolError;
}

}  // namespace pake::net
