#include "anongbdt/prng.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace ag {

void crypto_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

void keyed_hash(const Key& key, const u64* words, std::size_t nwords, u8* out, std::size_t outlen) {
  crypto_init();
  crypto_generichash(out, outlen, reinterpret_cast<const u8*>(words), nwords * sizeof(u64), key.data(),
                     key.size());
}

u64 hash64(const Key& key, std::initializer_list<u64> words) {
  u64 out;
  keyed_hash(key, words.begin(), words.size(), reinterpret_cast<u8*>(&out), sizeof(out));
  return out;
}

u128 hash128(const Key& key, std::initializer_list<u64> words) {
  u64 out[2];
  keyed_hash(key, words.begin(), words.size(), reinterpret_cast<u8*>(out), sizeof(out));
  return (u128(out[1]) << 64) | out[0];
}

Key derive_key(const Key& parent, std::string_view label, std::initializer_list<u64> words) {
  crypto_init();
  crypto_generichash_state st;
  crypto_generichash_init(&st, parent.data(), parent.size(), 32);
  crypto_generichash_update(&st, reinterpret_cast<const u8*>(label.data()), label.size());
  u64 sep = 0xA5A5A5A5A5A5A5A5ull;
  crypto_generichash_update(&st, reinterpret_cast<const u8*>(&sep), sizeof(sep));
  crypto_generichash_update(&st, reinterpret_cast<const u8*>(words.begin()), words.size() * sizeof(u64));
  Key k;
  crypto_generichash_final(&st, k.data(), k.size());
  return k;
}

Key derive_key(u64 seed, std::string_view label, std::initializer_list<u64> words) {
  Key root{};
  std::memcpy(root.data(), &seed, sizeof(seed));
  return derive_key(root, label, words);
}

Prg::Prg(const Key& key) : key_(key) { crypto_init(); }
Prg::Prg(u64 seed, std::string_view label) : Prg(derive_key(seed, label)) {}

void Prg::refill() {
  static const u8 nonce[crypto_stream_chacha20_NONCEBYTES] = {0};
  std::memset(buf_.data(), 0, buf_.size());
  crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce, block_, key_.data());
  block_ += buf_.size() / 64;
  pos_ = 0;
}

void Prg::fill(void* out, std::size_t n) {
  u8* o = static_cast<u8*>(out);
  while (n > 0) {
    if (pos_ == buf_.size()) refill();
    std::size_t take = std::min(n, buf_.size() - pos_);
    std::memcpy(o, buf_.data() + pos_, take);
    pos_ += take;
    o += take;
    n -= take;
  }
}

u64 Prg::next() {
  u64 v;
  fill(&v, sizeof(v));
  return v;
}

u128 Prg::next128() {
  u64 v[2];
  fill(v, sizeof(v));
  return (u128(v[1]) << 64) | v[0];
}

u64 Prg::uniform(u64 bound) {
  if (bound == 0) throw std::invalid_argument("uniform: zero bound");
  if ((bound & (bound - 1)) == 0) return next() & (bound - 1);
  u64 limit = ~u64(0) - (~u64(0) % bound);
  for (;;) {
    u64 v = next();
    if (v < limit) return v % bound;
  }
}

double Prg::uniform01() { return double(next() >> 11) * 0x1.0p-53; }

double Prg::normal() {
  double u1 = uniform01(), u2 = uniform01();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace ag
