#pragma once
#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "anongbdt/bits.hpp"

namespace ag {

enum class Tag : u8 {
  Setup = 0,
  Ot,
  Mul,
  And,
  Mux,
  Greater,
  Equal,
  Trunc,
  Argmax,
  Div,
  Sigmoid,
  Open,
  PsiOpprf,
  PsiPsm,
  PsiPayload,
  SyncOis,
  SyncOois,
  SyncBois,
  HeKeys,
  HeA2H,
  HeH2A,
  Gbdt,
  Infer,
  Count
};
constexpr std::size_t kTagCount = static_cast<std::size_t>(Tag::Count);
const char* tag_name(Tag t);

constexpr std::size_t kFrameHeader = 5;
constexpr std::size_t kMaxFrame = std::size_t(64) << 20;

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrafficReport {
  std::array<u64, kTagCount> bytes_by_tag{};  // frame bytes sent, per tag
  u64 bytes_sent = 0;
  u64 bytes_recv = 0;
  u64 frames_sent = 0;
  u64 rounds = 0;
  std::map<std::string, double> phase_seconds;

  u64 total() const;
  void merge(const TrafficReport& o);
  std::string to_json() const;
};

// Reliable FIFO frame channel with per-tag accounting. One endpoint is used by one thread.
class Channel {
 public:
  virtual ~Channel() = default;
  void send(Tag tag, const Bytes& payload);
  Bytes recv(Tag expected);
  TrafficReport& report() { return rep_; }
  const TrafficReport& report() const { return rep_; }

  // Raw frame transport (header included). Public so decorators can forward.
  virtual void raw_send(Bytes&& frame) = 0;
  virtual Bytes raw_recv() = 0;
  // Unblocks a peer waiting in recv; subsequent operations throw.
  virtual void close() {}

 private:
  TrafficReport rep_;
  bool last_was_send_ = false;
};

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair();

// TCP endpoints. listen_tcp blocks until one peer connects.
std::unique_ptr<Channel> listen_tcp(int port);
std::unique_ptr<Channel> connect_tcp(const std::string& host, int port, int retry_ms = 10000);

struct LinkShape {
  double bandwidth_bps = 0;  // 0 = unlimited
  double latency_ms = 0;
  bool passthrough() const { return bandwidth_bps <= 0 && latency_ms <= 0; }
};
LinkShape parse_shape(const std::string& spec);  // "BW,LAT" e.g. "200e6,20"

// Wraps a channel so that outgoing frames are released after serialisation
// delay at the configured bandwidth plus one-way latency.
std::unique_ptr<Channel> shape(std::unique_ptr<Channel> inner, LinkShape s);

// Records wall-clock time of a named phase into a report.
class PhaseTimer {
 public:
  PhaseTimer(TrafficReport& rep, std::string name);
  ~PhaseTimer();

 private:
  TrafficReport& rep_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ag
