#include <gtest/gtest.h>

#include <sodium.h>

#include <chrono>
#include <thread>

#include "anongbdt/transport.hpp"

using namespace ag;

TEST(Transport, InprocEcho) {
  auto [a, b] = make_inproc_pair();
  a->send(Tag::Gbdt, {1, 2, 3});
  auto got = b->recv(Tag::Gbdt);
  EXPECT_EQ(got, (Bytes{1, 2, 3}));
  b->send(Tag::Gbdt, got);
  EXPECT_EQ(a->recv(Tag::Gbdt), (Bytes{1, 2, 3}));
  EXPECT_EQ(a->report().bytes_sent, 3 + kFrameHeader);
}

TEST(Transport, OrderAndCounters) {
  auto [a, b] = make_inproc_pair();
  Prg g(1);
  u64 expect = 0;
  std::vector<Bytes> sent;
  for (int i = 0; i < 10000; ++i) {
    Bytes p(g.uniform(64));
    g.fill(p.data(), p.size());
    a->send(Tag::Mux, p);
    expect += p.size() + kFrameHeader;
    sent.push_back(p);
  }
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(b->recv(Tag::Mux), sent[i]);
  EXPECT_EQ(a->report().bytes_by_tag[size_t(Tag::Mux)], expect);
  EXPECT_EQ(a->report().total(), expect);
  EXPECT_EQ(b->report().bytes_recv, expect);
}

TEST(Transport, TagMismatchThrows) {
  auto [a, b] = make_inproc_pair();
  a->send(Tag::Mux, {});
  EXPECT_THROW(b->recv(Tag::And), ProtocolError);
}

TEST(Transport, RandomFrameSizes) {
  auto [a, b] = make_inproc_pair();
  Prg g(2);
  for (int i = 0; i < 20; ++i) {
    Bytes p(g.uniform(1 << 20));
    g.fill(p.data(), p.size());
    a->send(Tag::Setup, p);
    ASSERT_EQ(b->recv(Tag::Setup), p);
  }
}

TEST(Transport, RoundsCountDirectionFlips) {
  auto [a, b] = make_inproc_pair();
  for (int i = 0; i < 5; ++i) {
    a->send(Tag::Open, {1});
    b->recv(Tag::Open);
    b->send(Tag::Open, {1});
    a->recv(Tag::Open);
  }
  EXPECT_EQ(a->report().rounds, 5u);
}

TEST(Transport, TcpLoopbackIntegrity) {
  const int port = 39000 + int(::getpid() % 2000);
  std::unique_ptr<Channel> server;
  std::thread t([&] { server = listen_tcp(port); });
  auto client = connect_tcp("127.0.0.1", port);
  t.join();
  Bytes big(1 << 20);
  Prg g(3);
  g.fill(big.data(), big.size());
  client->send(Tag::HeKeys, big);
  Bytes got = server->recv(Tag::HeKeys);
  u8 h1[32], h2[32];
  crypto_generichash(h1, 32, big.data(), big.size(), nullptr, 0);
  crypto_generichash(h2, 32, got.data(), got.size(), nullptr, 0);
  EXPECT_EQ(0, memcmp(h1, h2, 32));
  server->send(Tag::HeKeys, {9});
  EXPECT_EQ(client->recv(Tag::HeKeys), Bytes{9});
  EXPECT_EQ(client->report().bytes_sent, server->report().bytes_recv);
  EXPECT_EQ(server->report().bytes_sent, client->report().bytes_recv);
}

TEST(Transport, ShapeLatency) {
  auto [a, b] = make_inproc_pair();
  auto sa = shape(std::move(a), {0, 20});
  auto sb = shape(std::move(b), {0, 20});
  auto t0 = std::chrono::steady_clock::now();
  sa->send(Tag::Open, {1});
  sb->recv(Tag::Open);
  sb->send(Tag::Open, {1});
  sa->recv(Tag::Open);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GE(ms, 40.0);
  EXPECT_LE(ms, 40.0 * 1.2 + 5);
}

TEST(Transport, ShapeBandwidth) {
  auto [a, b] = make_inproc_pair();
  auto sa = shape(std::move(a), {80e6, 0});  // 10 MB/s
  Bytes chunk(100000);
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 20; ++i) sa->send(Tag::Setup, chunk);
  for (int i = 0; i < 20; ++i) b->recv(Tag::Setup);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double expect = 20 * (100000 + kFrameHeader) * 8 / 80e6;
  EXPECT_GE(s, expect * 0.95);
  EXPECT_LE(s, expect * 1.2 + 0.02);
}

TEST(Transport, ZeroShapeIsPassthrough) {
  auto [a, b] = make_inproc_pair();
  Channel* raw = a.get();
  auto s = shape(std::move(a), {0, 0});
  EXPECT_EQ(s.get(), raw);
  EXPECT_THROW(parse_shape("12"), std::invalid_argument);
  auto ls = parse_shape("200e6,20");
  EXPECT_DOUBLE_EQ(ls.bandwidth_bps, 200e6);
  EXPECT_DOUBLE_EQ(ls.latency_ms, 20);
}
