#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ipmsrl/protocol.hpp"

namespace ipmsrl {

struct ServeOptions {
  std::chrono::milliseconds idle_timeout{300'000};
};

enum class SessionEnd { Eof, IdleTimeout, IoError };

namespace detail {

inline bool write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace detail

// Runs one session over a pair of file descriptors, one request per line.
// Returns when input ends or nothing arrives within the idle timeout.
inline SessionEnd serve_stream(std::shared_ptr<const Scenario> sc, int in_fd, int out_fd,
                               const ServeOptions& opts = {}) {
  Session session(std::move(sc));
  std::string buf;
  char chunk[4096];
  for (;;) {
    for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (!detail::write_all(out_fd, session.handle(line) + "\n")) return SessionEnd::IoError;
    }
    pollfd p{in_fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(opts.idle_timeout.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) return SessionEnd::IoError;
    if (r == 0) return SessionEnd::IdleTimeout;
    const ssize_t n = ::read(in_fd, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) return SessionEnd::IoError;
    if (n == 0) {
      // A final request without a trailing newline still gets its answer.
      if (buf.find_first_not_of(" \t\r") != std::string::npos) {
        detail::write_all(out_fd, session.handle(buf) + "\n");
      }
      return SessionEnd::Eof;
    }
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

inline SessionEnd serve_stdio(std::shared_ptr<const Scenario> sc, const ServeOptions& opts = {}) {
  return serve_stream(std::move(sc), STDIN_FILENO, STDOUT_FILENO, opts);
}

// Listens on host:port (port 0 picks a free one, reported through
// on_listening) and runs each connection as an independent session on its
// own thread. Stops after max_sessions connections if that is positive.
inline void serve_tcp(std::shared_ptr<const Scenario> sc, const std::string& host, int port,
                      const ServeOptions& opts = {}, int max_sessions = 0,
                      const std::function<void(int)>& on_listening = {}) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket() failed");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw std::runtime_error("bad listen address '" + host + "'");
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 16) < 0) {
    ::close(fd);
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));

  std::vector<std::thread> sessions;
  for (int served = 0; max_sessions <= 0 || served < max_sessions; ++served) {
    const int conn = ::accept(fd, nullptr, nullptr);
    if (conn < 0) {
      if (errno == EINTR) {
        --served;
        continue;
      }
      break;
    }
    sessions.emplace_back([sc, conn, opts] {
      serve_stream(sc, conn, conn, opts);
      ::close(conn);
    });
  }
  ::close(fd);
  for (auto& t : sessions) t.join();
}

}  // namespace ipmsrl
