#pragma once
#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace ag {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using Key = std::array<u8, 32>;

// Keyed BLAKE2b over an arbitrary list of 64-bit words. Output length 8..64 bytes.
void keyed_hash(const Key& key, const u64* words, std::size_t nwords, u8* out, std::size_t outlen);
u64 hash64(const Key& key, std::initializer_list<u64> words);
u128 hash128(const Key& key, std::initializer_list<u64> words);

// Derive a 32-byte key from a seed and a domain label (plus optional words).
Key derive_key(u64 seed, std::string_view label, std::initializer_list<u64> words = {});
Key derive_key(const Key& parent, std::string_view label, std::initializer_list<u64> words = {});

// ChaCha20 keystream generator with a small buffer.
class Prg {
 public:
  explicit Prg(const Key& key);
  explicit Prg(u64 seed, std::string_view label = "prg");

  void fill(void* out, std::size_t n);
  u64 next();
  u128 next128();
  u64 uniform(u64 bound);  // in [0, bound), bound > 0
  bool bit() { return next() & 1; }
  double uniform01();     // in [0,1)
  double normal();

 private:
  void refill();
  Key key_{};
  u64 block_ = 0;
  std::array<u8, 1024> buf_{};
  std::size_t pos_ = sizeof(buf_);
};

// Ensures libsodium is initialised; safe to call repeatedly.
void crypto_init();

}  // namespace ag
