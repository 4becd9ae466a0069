#include "anongbdt/dealer.hpp"

#include <stdexcept>

namespace ag {

Dealer::Dealer(u64 seed, int party) : root_(derive_key(seed, "dealer")), party_(party) {
  if (party != 0 && party != 1) throw std::invalid_argument("party id must be 0 or 1");
}

Dealer::ArithTriples Dealer::arith_triples(std::size_t n) {
  u64 idx;
  {
    std::lock_guard<std::mutex> lk(mu_);
    idx = arith_n_++;
  }
  Prg g(derive_key(root_, "arith", {idx}));
  ArithTriples t;
  t.a.resize(n);
  t.b.resize(n);
  t.c.resize(n);
  std::vector<u64> buf(5 * n);
  g.fill(buf.data(), buf.size() * sizeof(u64));
  for (std::size_t i = 0; i < n; ++i) {
    u64 a0 = buf[5 * i], a1 = buf[5 * i + 1], b0 = buf[5 * i + 2], b1 = buf[5 * i + 3], c1 = buf[5 * i + 4];
    u64 c0 = (a0 + a1) * (b0 + b1) - c1;
    t.a[i] = party_ == 0 ? a0 : a1;
    t.b[i] = party_ == 0 ? b0 : b1;
    t.c[i] = party_ == 0 ? c0 : c1;
  }
  return t;
}

Dealer::BoolTriples Dealer::bool_triples(std::size_t nwords) {
  u64 idx;
  {
    std::lock_guard<std::mutex> lk(mu_);
    idx = bool_n_++;
  }
  Prg g(derive_key(root_, "bool", {idx}));
  BoolTriples t;
  t.a.resize(nwords);
  t.b.resize(nwords);
  t.c.resize(nwords);
  std::vector<u64> buf(5 * nwords);
  g.fill(buf.data(), buf.size() * sizeof(u64));
  for (std::size_t i = 0; i < nwords; ++i) {
    u64 a0 = buf[5 * i], a1 = buf[5 * i + 1], b0 = buf[5 * i + 2], b1 = buf[5 * i + 3], c1 = buf[5 * i + 4];
    u64 c0 = ((a0 ^ a1) & (b0 ^ b1)) ^ c1;
    t.a[i] = party_ == 0 ? a0 : a1;
    t.b[i] = party_ == 0 ? b0 : b1;
    t.c[i] = party_ == 0 ? c0 : c1;
  }
  return t;
}

static u128 get_bits(const u64* w, std::size_t pos, int width) {
  u128 v = 0;
  int got = 0;
  while (got < width) {
    std::size_t wi = pos >> 6;
    int off = int(pos & 63);
    int take = std::min(64 - off, width - got);
    u64 chunk = (w[wi] >> off) & mask_bits(take);
    v |= u128(chunk) << got;
    got += take;
    pos += take;
  }
  return v;
}

u128 Dealer::RotSender::get(std::size_t k, u32 j) const {
  return get_bits(R.data() + k * words_per, std::size_t(j) * width, width);
}

void Dealer::expand_rot(u32 n, int width, std::size_t count, RotSender* s, RotReceiver* r) {
  if (n < 1 || width < 1 || width > 128) throw std::invalid_argument("rot: bad parameters");
  u64 idx;
  {
    std::lock_guard<std::mutex> lk(mu_);
    idx = rot_n_++;
  }
  Prg g(derive_key(root_, "rot", {idx, n, u64(width)}));
  std::size_t wpo = (std::size_t(n) * width + 63) / 64;
  std::vector<u64> R(count * wpo);
  g.fill(R.data(), R.size() * sizeof(u64));
  std::vector<u32> c(count);
  for (std::size_t k = 0; k < count; ++k) c[k] = u32(g.uniform(n));
  if (s) {
    s->n = n;
    s->width = width;
    s->count = count;
    s->words_per = wpo;
    s->R = std::move(R);
    return;
  }
  r->c = std::move(c);
  r->Rc.resize(count);
  for (std::size_t k = 0; k < count; ++k) r->Rc[k] = get_bits(R.data() + k * wpo, std::size_t(r->c[k]) * width, width);
}

Dealer::RotSender Dealer::rot_sender(u32 n, int width, std::size_t count) {
  RotSender s;
  expand_rot(n, width, count, &s, nullptr);
  return s;
}

Dealer::RotReceiver Dealer::rot_receiver(u32 n, int width, std::size_t count) {
  RotReceiver r;
  expand_rot(n, width, count, nullptr, &r);
  return r;
}

Key Dealer::oprf_key() {
  u64 idx;
  {
    std::lock_guard<std::mutex> lk(mu_);
    idx = oprf_n_++;
  }
  return derive_key(root_, "oprf", {idx});
}

u64 Dealer::oprf(const Key& k, u64 bucket, u64 item) { return hash64(k, {bucket, item}); }

std::vector<u64> Dealer::oprf_eval(const std::vector<std::pair<u64, u64>>& queries) {
  Key k = oprf_key();
  std::vector<u64> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = oprf(k, queries[i].first, queries[i].second);
  return out;
}

}  // namespace ag
