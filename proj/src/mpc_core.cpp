#include <stdexcept>

#include "anongbdt/mpc.hpp"

namespace ag {

void RevealLog::add(RevealEntry e) {
  std::lock_guard<std::mutex> lk(mu_);
  entries_.push_back(std::move(e));
}

std::vector<RevealEntry> RevealLog::entries() const {
  std::lock_guard<std::mutex> lk(mu_);
  return entries_;
}

void RevealLog::clear() {
  std::lock_guard<std::mutex> lk(mu_);
  entries_.clear();
}

Party::Party(int id_, Channel& ch_, u64 dealer_seed, u64 local_seed, RevealLog* log_)
    : id(id_), ch(ch_), dealer(dealer_seed, id_), rng(derive_key(local_seed, "party", {u64(id_)})), log(log_) {}

Bytes Party::exchange(Tag t, const Bytes& mine) {
  if (id == 0) {
    ch.send(t, mine);
    return ch.recv(t);
  }
  Bytes theirs = ch.recv(t);
  ch.send(t, mine);
  return theirs;
}

void Party::reveal(const std::string& kind, int to_party, std::vector<i64> values, const std::string& ctx) {
  // Both parties run the same code. A reveal to both is recorded by party 0, a reveal to one
  // party by its recipient, so each is recorded once with the values actually learned.
  if (log && id == (to_party < 0 ? 0 : to_party)) log->add({kind, to_party, std::move(values), ctx});
}

Shares open_arith(Party& P, const Shares& x, Tag tag) {
  auto other = from_bytes(P.exchange(tag, to_bytes(x)));
  if (other.size() != x.size()) throw ProtocolError("open_arith: length mismatch");
  Shares r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + other[i];
  return r;
}

BitVec open_bits(Party& P, const BitVec& x, Tag tag) {
  auto w = pack_bits(x);
  auto other = from_bytes(P.exchange(tag, to_bytes(w)));
  if (other.size() != w.size()) throw ProtocolError("open_bits: length mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= other[i];
  return unpack_bits(w, x.size());
}

static int bits_for(u32 n) {
  int b = 0;
  while ((u64(1) << b) < n) ++b;
  return b;
}

// Sender half of the derandomisation: reads the receiver's offsets, answers.
static Bytes ot_respond(const Dealer::RotSender& rs, const Bytes& dmsg, const std::vector<u128>& msgs) {
  const u32 n = rs.n;
  const int db = bits_for(n);
  BitReader br(dmsg);
  BitWriter bw;
  for (std::size_t k = 0; k < rs.count; ++k) {
    u32 d = u32(br.get(db));
    if (d >= n) throw ProtocolError("ot: offset out of range");
    for (u32 j = 0; j < n; ++j) {
      u32 idx = j >= d ? j - d : j + n - d;
      bw.put128(msgs[k * n + j] ^ rs.get(k, idx), rs.width);
    }
  }
  return std::move(bw).finish();
}

static Bytes ot_offsets(const Dealer::RotReceiver& rr, u32 n, const std::vector<u32>& choices) {
  const int db = bits_for(n);
  BitWriter bw;
  for (std::size_t k = 0; k < choices.size(); ++k) {
    if (choices[k] >= n) throw std::out_of_range("ot: choice out of range");
    u32 d = choices[k] >= rr.c[k] ? choices[k] - rr.c[k] : choices[k] + n - rr.c[k];
    bw.put(d, db);
  }
  return std::move(bw).finish();
}

static std::vector<u128> ot_decode(const Dealer::RotReceiver& rr, u32 n, int width, const std::vector<u32>& choices,
                                   const Bytes& resp) {
  BitReader br(resp);
  std::vector<u128> out(choices.size());
  for (std::size_t k = 0; k < choices.size(); ++k) {
    br.skip(std::size_t(choices[k]) * width);
    out[k] = br.get128(width) ^ rr.Rc[k];
    br.skip(std::size_t(n - 1 - choices[k]) * width);
  }
  return out;
}

void ot_send(Party& P, u32 n, int width, const std::vector<u128>& msgs, Tag tag) {
  if (n == 0 || msgs.size() % n) throw std::invalid_argument("ot_send: message count not a multiple of n");
  std::size_t count = msgs.size() / n;
  auto rs = P.dealer.rot_sender(n, width, count);
  Bytes d = P.recv(tag);
  P.send(tag, ot_respond(rs, d, msgs));
  P.ctr.ot += count;
}

std::vector<u128> ot_recv(Party& P, u32 n, int width, const std::vector<u32>& choices, Tag tag) {
  auto rr = P.dealer.rot_receiver(n, width, choices.size());
  P.send(tag, ot_offsets(rr, n, choices));
  Bytes resp = P.recv(tag);
  P.ctr.ot += choices.size();
  return ot_decode(rr, n, width, choices, resp);
}

std::vector<u128> ot_both_ways(Party& P, u32 n, int width, const std::vector<u128>& msgs,
                               const std::vector<u32>& choices, Tag tag) {
  if (msgs.size() != choices.size() * n) throw std::invalid_argument("ot_both_ways: size mismatch");
  const std::size_t count = choices.size();
  Dealer::RotSender rs;
  Dealer::RotReceiver rr;
  // The batch where party 0 sends is always drawn first.
  if (P.id == 0) {
    rs = P.dealer.rot_sender(n, width, count);
    rr = P.dealer.rot_receiver(n, width, count);
  } else {
    rr = P.dealer.rot_receiver(n, width, count);
    rs = P.dealer.rot_sender(n, width, count);
  }
  Bytes peer_d = P.exchange(tag, ot_offsets(rr, n, choices));
  Bytes peer_resp = P.exchange(tag, ot_respond(rs, peer_d, msgs));
  P.ctr.ot += 2 * count;
  return ot_decode(rr, n, width, choices, peer_resp);
}

Shares const_share(const Party& P, std::size_t n, u64 value) { return Shares(n, P.id == 0 ? value : 0); }

Shares mul(Party& P, const Shares& x, const Shares& y, Tag tag) {
  if (x.size() != y.size()) throw std::invalid_argument("mul: length mismatch");
  const std::size_t n = x.size();
  auto t = P.dealer.arith_triples(n);
  std::vector<u64> ed(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    ed[i] = x[i] - t.a[i];
    ed[n + i] = y[i] - t.b[i];
  }
  auto other = from_bytes(P.exchange(tag, to_bytes(ed)));
  if (other.size() != ed.size()) throw ProtocolError("mul: length mismatch");
  Shares z(n);
  for (std::size_t i = 0; i < n; ++i) {
    u64 e = ed[i] + other[i], d = ed[n + i] + other[n + i];
    z[i] = t.c[i] + e * t.b[i] + d * t.a[i] + (P.id == 0 ? e * d : 0);
  }
  P.ctr.mul += n;
  return z;
}

Shares trunc_exact(Party& P, const Shares& x, int s) {
  if (s < 0 || s >= 62) throw std::invalid_argument("trunc_exact: bad shift");
  if (s == 0 || x.empty()) return x;
  const std::size_t n = x.size();
  const u64 bias = u64(1) << 62;
  const u64 lowmask = mask_bits(s);
  std::vector<u64> xs(n), cmp_in(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = P.id == 0 ? x[i] + bias : x[i];
    u64 lo = xs[i] & lowmask;
    cmp_in[i] = P.id == 0 ? lo : (lowmask - lo);
  }
  // carry of the low s bits: lo0 + lo1 >= 2^s  <=>  lo0 > 2^s - 1 - lo1
  BitVec carry = millionaire(P, cmp_in, s);
  // Products of privately held bits: msb(x0') * msb(x1') and c0 * c1.
  Shares X(2 * n, 0), Y(2 * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    u64 msb = xs[i] >> 63;
    if (P.id == 0) {
      X[i] = msb;
      X[n + i] = carry[i];
    } else {
      Y[i] = msb;
      Y[n + i] = carry[i];
    }
  }
  Shares prod = mul(P, X, Y, Tag::Trunc);
  Shares out(n);
  const int hs = 64 - s;
  for (std::size_t i = 0; i < n; ++i) {
    u64 msb = xs[i] >> 63;
    u64 v = (xs[i] >> s) + carry[i] - 2 * prod[n + i] - (msb << hs) + (prod[i] << hs);
    if (P.id == 0) v -= u64(1) << (62 - s);
    out[i] = v;
  }
  P.ctr.trunc += n;
  return out;
}

Shares mul_fixed(Party& P, const Shares& x, const Shares& y) { return trunc_exact(P, mul(P, x, y), P.fp.f); }

Shares mul_const_fixed(Party& P, const Shares& x, double c) {
  u64 cc = encode_fixed(c, P.fp);
  Shares y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * cc;
  return trunc_exact(P, y, P.fp.f);
}

BitVec and_bits(Party& P, const BitVec& x, const BitVec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("and_bits: length mismatch");
  if (x.empty()) return {};
  auto xw = pack_bits(x), yw = pack_bits(y);
  const std::size_t nw = xw.size();
  auto t = P.dealer.bool_triples(nw);
  std::vector<u64> ed(2 * nw);
  for (std::size_t i = 0; i < nw; ++i) {
    ed[i] = xw[i] ^ t.a[i];
    ed[nw + i] = yw[i] ^ t.b[i];
  }
  // Only the live bits travel.
  BitWriter bw;
  for (int h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < x.size(); i += 64) bw.put(ed[h * nw + i / 64], int(std::min<std::size_t>(64, x.size() - i)));
  Bytes peer = P.exchange(Tag::And, std::move(bw).finish());
  BitReader br(peer);
  std::vector<u64> z(nw);
  std::vector<u64> E(nw), D(nw);
  for (int h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < x.size(); i += 64) {
      u64 v = br.get(int(std::min<std::size_t>(64, x.size() - i)));
      (h == 0 ? E : D)[i / 64] = ed[h * nw + i / 64] ^ v;
    }
  for (std::size_t i = 0; i < nw; ++i) z[i] = t.c[i] ^ (E[i] & t.b[i]) ^ (D[i] & t.a[i]) ^ (P.id == 0 ? E[i] & D[i] : 0);
  P.ctr.and_gates += x.size();
  return unpack_bits(z, x.size());
}

BitVec or_bits(Party& P, const BitVec& x, const BitVec& y) {
  // x OR y = (x AND y) XOR x XOR y
  BitVec a = and_bits(P, x, y);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= x[i] ^ y[i];
  return a;
}

Shares mux(Party& P, const BitVec& b, const Shares& y) {
  if (b.size() != y.size()) throw std::invalid_argument("mux: length mismatch");
  const std::size_t n = b.size();
  std::vector<u128> msgs(2 * n);
  std::vector<u32> choice(n);
  Shares r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = P.rng.next();
    u64 bi = b[i] & 1;
    msgs[2 * i] = u64(bi * y[i] - r[i]);
    msgs[2 * i + 1] = u64((bi ^ 1) * y[i] - r[i]);
    choice[i] = u32(bi);
  }
  auto got = ot_both_ways(P, 2, 64, msgs, choice, Tag::Mux);
  for (std::size_t i = 0; i < n; ++i) r[i] += u64(got[i]);
  P.ctr.mux += n;
  return r;
}

std::pair<Shares, Shares> mux2(Party& P, const BitVec& b, const Shares& y, const Shares& z) {
  if (b.size() != y.size() || y.size() != z.size()) throw std::invalid_argument("mux2: length mismatch");
  const std::size_t n = b.size();
  std::vector<u128> msgs(2 * n);
  std::vector<u32> choice(n);
  Shares ry(n), rz(n);
  for (std::size_t i = 0; i < n; ++i) {
    ry[i] = P.rng.next();
    rz[i] = P.rng.next();
    u64 bi = b[i] & 1;
    for (u64 t = 0; t < 2; ++t) {
      u64 sel = bi ^ t;
      msgs[2 * i + t] = (u128(sel * z[i] - rz[i]) << 64) | u64(sel * y[i] - ry[i]);
    }
    choice[i] = u32(bi);
  }
  auto got = ot_both_ways(P, 2, 128, msgs, choice, Tag::Mux);
  for (std::size_t i = 0; i < n; ++i) {
    ry[i] += u64(got[i]);
    rz[i] += u64(got[i] >> 64);
  }
  P.ctr.mux += 2 * n;
  return {ry, rz};
}

Shares b2a(Party& P, const BitVec& b) { return mux(P, b, const_share(P, b.size(), 1)); }

}  // namespace ag
