// Copyright 2026 The Weave Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weave/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/select.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "weave/errors.h"

namespace weave {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kShareAnnounce: return "SHARE_ANNOUNCE";
    case MessageKind::kSigmaAnnounce: return "SIGMA_ANNOUNCE";
    case MessageKind::kAbort: return "ABORT";
    case MessageKind::kInputAnnounce: return "INPUT_ANNOUNCE";
    case MessageKind::kBarrier: return "BARRIER";
  }
  return "UNKNOWN";
}

namespace {

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (auto b : in) v = (v << 8) | b;
  return v;
}

bool valid_kind(std::uint8_t k) { return k >= 1 && k <= 5; }

}  // namespace

std::vector<std::uint8_t> encode_frame(const Envelope& env) {
  if (env.payload.size() > 0xffffffffULL) throw TransportError("payload exceeds 2^32-1 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + env.payload.size());
  put_be(out, env.payload.size(), 4);
  out.push_back(static_cast<std::uint8_t>(env.kind));
  put_be(out, env.round, 4);
  put_be(out, static_cast<std::uint16_t>(env.sender.index()), 2);
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  return out;
}

std::uint32_t decode_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> h,
                                  Envelope& env) {
  const auto length = static_cast<std::uint32_t>(get_be(h.subspan(0, 4)));
  if (!valid_kind(h[4])) throw FormatError("frame: unknown message kind " + std::to_string(h[4]));
  env.kind = static_cast<MessageKind>(h[4]);
  env.round = static_cast<std::uint32_t>(get_be(h.subspan(5, 4)));
  env.sender = PartyId(static_cast<int>(get_be(h.subspan(9, 2))));
  return length;
}

Envelope decode_frame(std::span<const std::uint8_t> frame) {
  if (frame.size() < kFrameHeaderBytes) throw FormatError("frame: shorter than header");
  Envelope env;
  const auto length =
      decode_frame_header(frame.first<kFrameHeaderBytes>(), env);
  if (frame.size() - kFrameHeaderBytes != length) {
    throw FormatError("frame: header announces " + std::to_string(length) + " payload bytes, got " +
                      std::to_string(frame.size() - kFrameHeaderBytes));
  }
  env.payload.assign(frame.begin() + kFrameHeaderBytes, frame.end());
  return env;
}

// ---------------------------------------------------------------------------
// Mailbox

void Mailbox::put(Envelope env) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (env.kind == MessageKind::kAbort) {
      if (!abort_) abort_ = env;
    } else {
      const Key key{env.round, env.sender.index(), static_cast<std::uint8_t>(env.kind)};
      inbox_.insert_or_assign(key, std::move(env));
    }
  }
  cv_.notify_all();
}

Envelope Mailbox::take(std::uint32_t round, PartyId from, MessageKind kind,
                       std::chrono::milliseconds timeout) {
  const Key key{round, from.index(), static_cast<std::uint8_t>(kind)};
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    if (abort_) {
      throw ProtocolAbort("party " + std::to_string(abort_->sender.index()) +
                              " aborted the computation in round " +
                              std::to_string(abort_->round),
                          abort_->round, abort_->sender.index());
    }
    auto it = inbox_.find(key);
    if (it != inbox_.end()) {
      Envelope env = std::move(it->second);
      inbox_.erase(it);
      return env;
    }
    if (closed_) throw TransportError("transport closed while waiting for a message");
    if (std::find(dead_.begin(), dead_.end(), from.index()) != dead_.end()) {
      throw TransportError("party " + std::to_string(from.index()) + " disconnected before round " +
                           std::to_string(round));
    }
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout &&
        inbox_.find(key) == inbox_.end() && !abort_) {
      throw TransportError("timed out after " + std::to_string(timeout.count()) +
                           " ms waiting for " + to_string(kind) + " from party " +
                           std::to_string(from.index()) + " in round " + std::to_string(round));
    }
  }
}

void Mailbox::mark_dead(PartyId peer) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    dead_.push_back(peer.index());
  }
  cv_.notify_all();
}

void Mailbox::close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------
// Network

void Network::send(PartyId to, Envelope env) {
  std::lock_guard<std::mutex> lock(send_mu_);
  env.sender = self();
  if (interceptor_) interceptor_(env, to);
  deliver(to, std::move(env));
}

void Network::broadcast(const Envelope& env) {
  for (int j = 1; j <= parties(); ++j) {
    if (j != self().index()) send(PartyId(j), env);
  }
}

void Network::intercept_own(Envelope& env) {
  std::lock_guard<std::mutex> lock(send_mu_);
  env.sender = self();
  if (interceptor_) interceptor_(env, self());
}

Envelope Network::receive(std::uint32_t round, PartyId from, MessageKind kind) {
  Envelope env = mailbox().take(round, from, kind, timeout_);
  if (observer_) observer_(env);
  return env;
}

std::vector<Envelope> Network::receive_all(std::uint32_t round, MessageKind kind) {
  std::vector<Envelope> out;
  out.reserve(static_cast<std::size_t>(parties() - 1));
  for (int j = 1; j <= parties(); ++j) {
    if (j != self().index()) out.push_back(receive(round, PartyId(j), kind));
  }
  return out;
}

void Network::round_barrier(std::uint32_t round) {
  Envelope env;
  env.round = round;
  env.kind = MessageKind::kBarrier;
  broadcast(env);
  receive_all(round, MessageKind::kBarrier);
}

// ---------------------------------------------------------------------------
// InProcessHub

class InProcessHub::Endpoint final : public Network {
 public:
  Endpoint(std::shared_ptr<InProcessHub> hub, PartyId self) : hub_(std::move(hub)), self_(self) {}

  PartyId self() const override { return self_; }
  int parties() const override { return hub_->n_; }

 protected:
  void deliver(PartyId to, Envelope env) override { hub_->route(self_, to, std::move(env)); }
  Mailbox& mailbox() override { return *hub_->boxes_[self_.slot()]; }

 private:
  std::shared_ptr<InProcessHub> hub_;
  PartyId self_;
};

std::shared_ptr<InProcessHub> InProcessHub::create(int n) {
  return std::shared_ptr<InProcessHub>(new InProcessHub(n));
}

InProcessHub::InProcessHub(int n) : n_(n), dead_(static_cast<std::size_t>(n), false) {
  if (n < 1) throw std::invalid_argument("InProcessHub: need at least one party");
  for (int i = 0; i < n; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

std::unique_ptr<Network> InProcessHub::endpoint(PartyId party) {
  if (party.index() < 1 || party.index() > n_) {
    throw std::out_of_range("InProcessHub: no party " + std::to_string(party.index()));
  }
  return std::make_unique<Endpoint>(shared_from_this(), party);
}

void InProcessHub::kill(PartyId party) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    dead_.at(party.slot()) = true;
  }
  for (int i = 0; i < n_; ++i) {
    if (i != static_cast<int>(party.slot())) boxes_[i]->mark_dead(party);
  }
  boxes_[party.slot()]->close();
}

std::uint64_t InProcessHub::delivered() const {
  std::lock_guard<std::mutex> lock(mu_);
  return delivered_;
}

void InProcessHub::route(PartyId from, PartyId to, Envelope env) {
  if (to.index() < 1 || to.index() > n_ || to == from) {
    throw TransportError("invalid receiver " + std::to_string(to.index()));
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (dead_[from.slot()] || dead_[to.slot()]) return;
    ++delivered_;
  }
  boxes_[to.slot()]->put(std::move(env));
}

// ---------------------------------------------------------------------------
// TCP

HostPort parse_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("expected host:port, got '" + text + "'");
  }
  HostPort hp;
  hp.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  unsigned long v = 0;
  try {
    std::size_t used = 0;
    v = std::stoul(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw ConfigError("invalid port in '" + text + "'");
  }
  if (v == 0 || v > 65535) throw ConfigError("port out of range in '" + text + "'");
  hp.port = static_cast<std::uint16_t>(v);
  return hp;
}

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// False on orderly EOF before the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

addrinfo* resolve(const HostPort& hp, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  const int rc = ::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) {
    throw TransportError("cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  }
  return res;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

TcpNetwork::TcpNetwork(PartyId self, std::vector<HostPort> roster,
                       std::chrono::milliseconds connect_timeout)
    : self_(self), roster_(std::move(roster)), fds_(roster_.size(), -1) {
  const int n = static_cast<int>(roster_.size());
  if (n < 2 || self.index() < 1 || self.index() > n) {
    throw ConfigError("tcp roster needs at least two parties including party " +
                      std::to_string(self.index()));
  }
  for (int i = 0; i < n; ++i) write_mu_.push_back(std::make_unique<std::mutex>());
  const auto deadline = std::chrono::steady_clock::now() + connect_timeout;

  int listener = -1;
  if (self.index() < n) {
    addrinfo* res = resolve(roster_[self.slot()], true);
    listener = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (listener < 0 || ::bind(listener, res->ai_addr, res->ai_addrlen) != 0 ||
        ::listen(listener, n) != 0) {
      const std::string err = std::strerror(errno);
      ::freeaddrinfo(res);
      if (listener >= 0) ::close(listener);
      throw TransportError("party " + std::to_string(self.index()) + " cannot listen on port " +
                           std::to_string(roster_[self.slot()].port) + ": " + err);
    }
    ::freeaddrinfo(res);
  }

  try {
    // Dial every lower-indexed party, retrying until it is listening.
    for (int j = 1; j < self.index(); ++j) {
      int fd = -1;
      for (;;) {
        addrinfo* res = resolve(roster_[j - 1], false);
        fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        const bool ok = fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0;
        ::freeaddrinfo(res);
        if (ok) break;
        if (fd >= 0) ::close(fd);
        if (std::chrono::steady_clock::now() > deadline) {
          throw TransportError("party " + std::to_string(self.index()) +
                               " could not connect to party " + std::to_string(j));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      set_nodelay(fd);
      const std::uint8_t hello[2] = {static_cast<std::uint8_t>(self.index() >> 8),
                                     static_cast<std::uint8_t>(self.index())};
      write_all(fd, hello, 2);
      fds_[j - 1] = fd;
    }
    // Accept every higher-indexed party.
    for (int accepted = 0; accepted < n - self.index(); ++accepted) {
      for (;;) {
        timeval tv{};
        const auto left = std::chrono::duration_cast<std::chrono::microseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
          throw TransportError("party " + std::to_string(self.index()) +
                               " timed out waiting for peers to connect");
        }
        tv.tv_sec = static_cast<time_t>(left.count() / 1000000);
        tv.tv_usec = static_cast<suseconds_t>(left.count() % 1000000);
        fd_set set;
        FD_ZERO(&set);
        FD_SET(listener, &set);
        const int rc = ::select(listener + 1, &set, nullptr, nullptr, &tv);
        if (rc < 0 && errno == EINTR) continue;
        if (rc <= 0) continue;
        break;
      }
      const int fd = ::accept(listener, nullptr, nullptr);
      if (fd < 0) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
      set_nodelay(fd);
      std::uint8_t hello[2];
      if (!read_all(fd, hello, 2)) {
        ::close(fd);
        throw TransportError("peer closed during handshake");
      }
      const int peer = (hello[0] << 8) | hello[1];
      if (peer <= self.index() || peer > n || fds_[peer - 1] != -1) {
        ::close(fd);
        throw TransportError("unexpected handshake from party " + std::to_string(peer));
      }
      fds_[peer - 1] = fd;
    }
  } catch (...) {
    if (listener >= 0) ::close(listener);
    for (int fd : fds_) {
      if (fd >= 0) ::close(fd);
    }
    throw;
  }
  if (listener >= 0) ::close(listener);

  for (int j = 1; j <= n; ++j) {
    if (j == self.index()) continue;
    readers_.emplace_back(&TcpNetwork::reader_loop, this, PartyId(j), fds_[j - 1]);
  }
}

TcpNetwork::~TcpNetwork() {
  for (int fd : fds_) {
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : readers_) t.join();
  for (int fd : fds_) {
    if (fd >= 0) ::close(fd);
  }
}

void TcpNetwork::deliver(PartyId to, Envelope env) {
  if (to.index() < 1 || to.index() > parties() || to == self_) {
    throw TransportError("invalid receiver " + std::to_string(to.index()));
  }
  const auto frame = encode_frame(env);
  std::lock_guard<std::mutex> lock(*write_mu_[to.slot()]);
  write_all(fds_[to.slot()], frame.data(), frame.size());
}

void TcpNetwork::reader_loop(PartyId peer, int fd) {
  try {
    for (;;) {
      std::array<std::uint8_t, kFrameHeaderBytes> header{};
      if (!read_all(fd, header.data(), header.size())) break;
      Envelope env;
      const auto length = decode_frame_header(header, env);
      if (env.sender != peer) throw TransportError("frame sender does not match connection");
      env.payload.resize(length);
      if (length > 0 && !read_all(fd, env.payload.data(), length)) {
        throw TransportError("connection closed mid-frame");
      }
      mailbox_.put(std::move(env));
    }
  } catch (const std::exception&) {
    // Fall through: the peer is treated as gone.
  }
  mailbox_.mark_dead(peer);
}

}  // namespace weave
