#include "anongbdt/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace ag {

static const char* kTagNames[kTagCount] = {
    "SETUP",     "MPC_OT",    "MPC_MUL",     "MPC_AND",   "MPC_MUX",   "MPC_GREATER", "MPC_EQUAL", "MPC_TRUNC",
    "MPC_ARGMAX", "MPC_DIV",  "MPC_SIGMOID", "MPC_OPEN",  "PSI_OPPRF", "PSI_PSM",     "PSI_PAYLOAD", "SYNC_OIS",
    "SYNC_OOIS", "SYNC_BOIS", "HE_KEYS",     "HE_A2H",    "HE_H2A",    "GBDT",        "INFER"};

const char* tag_name(Tag t) {
  auto i = static_cast<std::size_t>(t);
  return i < kTagCount ? kTagNames[i] : "UNKNOWN";
}

u64 TrafficReport::total() const {
  u64 s = 0;
  for (u64 b : bytes_by_tag) s += b;
  return s;
}

void TrafficReport::merge(const TrafficReport& o) {
  for (std::size_t i = 0; i < kTagCount; ++i) bytes_by_tag[i] += o.bytes_by_tag[i];
  bytes_sent += o.bytes_sent;
  bytes_recv += o.bytes_recv;
  frames_sent += o.frames_sent;
  rounds += o.rounds;
  for (auto& [k, v] : o.phase_seconds) phase_seconds[k] += v;
}

std::string TrafficReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json tags = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kTagCount; ++i)
    if (bytes_by_tag[i]) tags[kTagNames[i]] = bytes_by_tag[i];
  j["bytes_by_tag"] = tags;
  j["bytes_sent"] = bytes_sent;
  j["bytes_recv"] = bytes_recv;
  j["frames_sent"] = frames_sent;
  j["rounds"] = rounds;
  return j.dump();
}

void Channel::send(Tag tag, const Bytes& payload) {
  if (payload.size() > kMaxFrame) throw ProtocolError("frame exceeds 64MB limit");
  Bytes frame(kFrameHeader + payload.size());
  u32 n = static_cast<u32>(payload.size());
  frame[0] = u8(n >> 24);
  frame[1] = u8(n >> 16);
  frame[2] = u8(n >> 8);
  frame[3] = u8(n);
  frame[4] = static_cast<u8>(tag);
  if (!payload.empty()) std::memcpy(frame.data() + kFrameHeader, payload.data(), payload.size());
  rep_.bytes_by_tag[static_cast<std::size_t>(tag)] += frame.size();
  rep_.bytes_sent += frame.size();
  rep_.frames_sent += 1;
  last_was_send_ = true;
  raw_send(std::move(frame));
}

Bytes Channel::recv(Tag expected) {
  if (last_was_send_) {
    rep_.rounds += 1;
    last_was_send_ = false;
  }
  Bytes frame = raw_recv();
  if (frame.size() < kFrameHeader) throw ProtocolError("short frame");
  u32 n = (u32(frame[0]) << 24) | (u32(frame[1]) << 16) | (u32(frame[2]) << 8) | u32(frame[3]);
  if (n + kFrameHeader != frame.size()) throw ProtocolError("frame length mismatch");
  if (frame[4] != static_cast<u8>(expected))
    throw ProtocolError(std::string("unexpected frame tag ") + tag_name(static_cast<Tag>(frame[4])) +
                        ", expected " + tag_name(expected));
  rep_.bytes_recv += frame.size();
  return Bytes(frame.begin() + kFrameHeader, frame.end());
}

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> q;
  bool closed = false;
};

class InprocChannel : public Channel {
 public:
  InprocChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in) : out_(std::move(out)), in_(std::move(in)) {}
  ~InprocChannel() override { close(); }
  void raw_send(Bytes&& frame) override {
    std::lock_guard<std::mutex> lk(out_->mu);
    if (out_->closed) throw ProtocolError("channel closed");
    out_->q.push_back(std::move(frame));
    out_->cv.notify_one();
  }
  Bytes raw_recv() override {
    std::unique_lock<std::mutex> lk(in_->mu);
    in_->cv.wait(lk, [&] { return !in_->q.empty() || in_->closed; });
    if (in_->q.empty()) throw ProtocolError("peer closed the channel");
    Bytes f = std::move(in_->q.front());
    in_->q.pop_front();
    return f;
  }
  void close() override {
    for (auto* p : {out_.get(), in_.get()}) {
      std::lock_guard<std::mutex> lk(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Pipe> out_, in_;
};

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }
  void raw_send(Bytes&& frame) override { write_all(frame.data(), frame.size()); }
  Bytes raw_recv() override {
    Bytes hdr(kFrameHeader);
    read_all(hdr.data(), hdr.size());
    u32 n = (u32(hdr[0]) << 24) | (u32(hdr[1]) << 16) | (u32(hdr[2]) << 8) | u32(hdr[3]);
    if (n > kMaxFrame) throw ProtocolError("incoming frame exceeds 64MB limit");
    hdr.resize(kFrameHeader + n);
    if (n) read_all(hdr.data() + kFrameHeader, n);
    return hdr;
  }
  void close() override {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  void write_all(const u8* p, std::size_t n) {
    while (n > 0) {
      ssize_t w = ::send(fd_, p, n, MSG_NOSIGNAL);
      if (w <= 0) throw ProtocolError("tcp send failed");
      p += w;
      n -= std::size_t(w);
    }
  }
  void read_all(u8* p, std::size_t n) {
    while (n > 0) {
      ssize_t r = ::recv(fd_, p, n, 0);
      if (r <= 0) throw ProtocolError("tcp peer closed the connection");
      p += r;
      n -= std::size_t(r);
    }
  }
  int fd_;
};

class ShapedChannel : public Channel {
 public:
  ShapedChannel(std::unique_ptr<Channel> inner, LinkShape s) : inner_(std::move(inner)), shape_(s) {
    worker_ = std::thread([this] { run(); });
  }
  ~ShapedChannel() override {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      cv_.notify_all();
    }
    worker_.join();
  }
  void raw_send(Bytes&& frame) override {
    using namespace std::chrono;
    auto now = steady_clock::now();
    double tx = shape_.bandwidth_bps > 0 ? double(frame.size()) * 8.0 / shape_.bandwidth_bps : 0.0;
    std::lock_guard<std::mutex> lk(mu_);
    if (failed_) throw ProtocolError("shaped channel failed");
    auto start = std::max(now, tx_end_);
    tx_end_ = start + duration_cast<steady_clock::duration>(duration<double>(tx));
    auto release = tx_end_ + duration_cast<steady_clock::duration>(duration<double, std::milli>(shape_.latency_ms));
    q_.push_back({release, std::move(frame)});
    cv_.notify_all();
  }
  Bytes raw_recv() override { return inner_->raw_recv(); }
  void close() override { inner_->close(); }

 private:
  void run() {
    std::unique_lock<std::mutex> lk(mu_);
    for (;;) {
      cv_.wait(lk, [&] { return stop_ || !q_.empty(); });
      if (q_.empty()) return;
      auto release = q_.front().first;
      if (std::chrono::steady_clock::now() < release) {
        cv_.wait_until(lk, release);
        continue;
      }
      Bytes f = std::move(q_.front().second);
      q_.pop_front();
      lk.unlock();
      try {
        inner_->raw_send(std::move(f));
      } catch (...) {
        lk.lock();
        failed_ = true;
        continue;
      }
      lk.lock();
    }
  }
  std::unique_ptr<Channel> inner_;
  LinkShape shape_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<std::chrono::steady_clock::time_point, Bytes>> q_;
  std::chrono::steady_clock::time_point tx_end_{};
  bool stop_ = false;
  bool failed_ = false;
  std::thread worker_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair() {
  auto a = std::make_shared<Pipe>(), b = std::make_shared<Pipe>();
  return {std::make_unique<InprocChannel>(a, b), std::make_unique<InprocChannel>(b, a)};
}

std::unique_ptr<Channel> listen_tcp(int port) {
  int s = ::socket(AF_INET, SOCK_STREAM, 0);
  if (s < 0) throw ProtocolError("socket() failed");
  int one = 1;
  setsockopt(s, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(s, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(s, 1) < 0) {
    ::close(s);
    throw ProtocolError("cannot listen on port " + std::to_string(port));
  }
  int c = ::accept(s, nullptr, nullptr);
  ::close(s);
  if (c < 0) throw ProtocolError("accept() failed");
  return std::make_unique<TcpChannel>(c);
}

std::unique_ptr<Channel> connect_tcp(const std::string& host, int port, int retry_ms) {
  addrinfo hints{}, *res = nullptr;
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw ProtocolError("cannot resolve " + host);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(retry_ms);
  for (;;) {
    int s = ::socket(AF_INET, SOCK_STREAM, 0);
    if (s >= 0 && ::connect(s, res->ai_addr, res->ai_addrlen) == 0) {
      freeaddrinfo(res);
      return std::make_unique<TcpChannel>(s);
    }
    if (s >= 0) ::close(s);
    if (std::chrono::steady_clock::now() > deadline) {
      freeaddrinfo(res);
      throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

LinkShape parse_shape(const std::string& spec) {
  LinkShape s;
  auto comma = spec.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("shape must be BW,LAT");
  s.bandwidth_bps = std::stod(spec.substr(0, comma));
  s.latency_ms = std::stod(spec.substr(comma + 1));
  if (s.bandwidth_bps < 0 || s.latency_ms < 0) throw std::invalid_argument("shape values must be non-negative");
  return s;
}

std::unique_ptr<Channel> shape(std::unique_ptr<Channel> inner, LinkShape s) {
  if (s.passthrough()) return inner;
  return std::make_unique<ShapedChannel>(std::move(inner), s);
}

PhaseTimer::PhaseTimer(TrafficReport& rep, std::string name)
    : rep_(rep), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

PhaseTimer::~PhaseTimer() {
  rep_.phase_seconds[name_] +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

}  // namespace ag
