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

#ifndef WEAVE_TRANSPORT_H_
#define WEAVE_TRANSPORT_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "weave/sharing.h"

namespace weave {

enum class MessageKind : std::uint8_t {
  kShareAnnounce = 1,  // partial opening of value shares
  kSigmaAnnounce = 2,  // MAC-check sigma plus view digest
  kAbort = 3,
  kInputAnnounce = 4,  // masked private input x - r
  kBarrier = 5,
};

const char* to_string(MessageKind kind);

struct Envelope {
  std::uint32_t round = 0;
  PartyId sender;
  MessageKind kind = MessageKind::kShareAnnounce;
  std::vector<std::uint8_t> payload;
};

// TCP frame: 4-byte big-endian payload length, 1-byte kind, 4-byte big-endian
// round, 2-byte big-endian sender, payload.
inline constexpr std::size_t kFrameHeaderBytes = 11;
std::vector<std::uint8_t> encode_frame(const Envelope& env);
// Parses the fixed header; returns the payload length it announces.
std::uint32_t decode_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> header,
                                  Envelope& env);
Envelope decode_frame(std::span<const std::uint8_t> frame);

inline constexpr std::chrono::milliseconds kDefaultRoundTimeout{30000};

// Inbound messages for one party, keyed by (round, sender, kind).
class Mailbox {
 public:
  void put(Envelope env);
  // Blocks until the message arrives. Throws ProtocolAbort as soon as any
  // ABORT has been received, TransportError when `from` is gone or the
  // deadline passes.
  Envelope take(std::uint32_t round, PartyId from, MessageKind kind,
                std::chrono::milliseconds timeout);
  void mark_dead(PartyId peer);
  void close();

 private:
  using Key = std::tuple<std::uint32_t, int, std::uint8_t>;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<Key, Envelope> inbox_;
  std::optional<Envelope> abort_;
  std::vector<int> dead_;
  bool closed_ = false;
};

// One party's handle on the network. The only object in the protocol stack
// that is safe to share between threads.
class Network {
 public:
  // Runs on the sender's side for every copy of every outgoing message.
  using SendInterceptor = std::function<void(Envelope& env, PartyId receiver)>;
  // Runs on every message this party consumes, in consumption order.
  using ReceiveObserver = std::function<void(const Envelope& env)>;

  virtual ~Network() = default;

  virtual PartyId self() const = 0;
  virtual int parties() const = 0;

  void send(PartyId to, Envelope env);
  // One copy to every other party, in increasing party order.
  void broadcast(const Envelope& env);
  // Runs the interceptor on the sender's own copy (receiver == self), so a
  // deviating party keeps a local view consistent with what it sent.
  void intercept_own(Envelope& env);
  Envelope receive(std::uint32_t round, PartyId from, MessageKind kind);
  // Messages of `kind` from every other party for `round`, in sender order.
  std::vector<Envelope> receive_all(std::uint32_t round, MessageKind kind);
  // Returns once every party has entered `round`.
  void round_barrier(std::uint32_t round);

  void set_interceptor(SendInterceptor f) { interceptor_ = std::move(f); }
  void set_observer(ReceiveObserver f) { observer_ = std::move(f); }
  void set_timeout(std::chrono::milliseconds t) { timeout_ = t; }
  std::chrono::milliseconds timeout() const { return timeout_; }

 protected:
  virtual void deliver(PartyId to, Envelope env) = 0;
  virtual Mailbox& mailbox() = 0;

 private:
  SendInterceptor interceptor_;
  ReceiveObserver observer_;
  std::chrono::milliseconds timeout_ = kDefaultRoundTimeout;
  std::mutex send_mu_;
};

// Deterministic in-process network: every party is a thread in this process
// and messages are handed over through per-party mailboxes.
class InProcessHub : public std::enable_shared_from_this<InProcessHub> {
 public:
  static std::shared_ptr<InProcessHub> create(int n);

  int parties() const { return n_; }
  std::unique_ptr<Network> endpoint(PartyId party);
  // Simulates a crashed party: its outgoing messages are dropped and peers
  // waiting on it fail with TransportError.
  void kill(PartyId party);
  std::uint64_t delivered() const;

 private:
  explicit InProcessHub(int n);
  class Endpoint;
  void route(PartyId from, PartyId to, Envelope env);

  int n_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  mutable std::mutex mu_;
  std::vector<bool> dead_;
  std::uint64_t delivered_ = 0;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

HostPort parse_host_port(const std::string& text);

// Full-mesh framed TCP. Party i accepts connections from higher-indexed
// parties and dials lower-indexed ones; each connection opens with the
// dialler's 2-byte big-endian party index. Links are assumed authenticated.
class TcpNetwork final : public Network {
 public:
  TcpNetwork(PartyId self, std::vector<HostPort> roster,
             std::chrono::milliseconds connect_timeout = kDefaultRoundTimeout);
  ~TcpNetwork() override;

  TcpNetwork(const TcpNetwork&) = delete;
  TcpNetwork& operator=(const TcpNetwork&) = delete;

  PartyId self() const override { return self_; }
  int parties() const override { return static_cast<int>(roster_.size()); }

 protected:
  void deliver(PartyId to, Envelope env) override;
  Mailbox& mailbox() override { return mailbox_; }

 private:
  void reader_loop(PartyId peer, int fd);

  PartyId self_;
  std::vector<HostPort> roster_;
  std::vector<int> fds_;
  std::vector<std::unique_ptr<std::mutex>> write_mu_;
  std::vector<std::thread> readers_;
  Mailbox mailbox_;
};

}  // namespace weave

#endif  // WEAVE_TRANSPORT_H_
