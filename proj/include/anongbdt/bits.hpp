#pragma once
#include <cstring>
#include <stdexcept>
#include <vector>

#include "anongbdt/prng.hpp"

namespace ag {

using Bytes = std::vector<u8>;
// One boolean share per element, stored as 0/1 bytes.
using BitVec = std::vector<u8>;

// Append-only bit packer, least significant bit first.
class BitWriter {
 public:
  void put(u64 v, int nbits);
  void put128(u128 v, int nbits);
  void put_bytes(const void* p, std::size_t n);
  Bytes finish() &&;
  std::size_t bit_size() const { return bits_; }

 private:
  Bytes out_;
  u64 acc_ = 0;
  int fill_ = 0;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Bytes& in) : in_(in) {}
  u64 get(int nbits);
  u128 get128(int nbits);
  void get_bytes(void* p, std::size_t n);
  void skip(std::size_t nbits) { pos_ += nbits; }

 private:
  const Bytes& in_;
  std::size_t pos_ = 0;  // bit position
};

inline u64 mask_bits(int nbits) { return nbits >= 64 ? ~u64(0) : ((u64(1) << nbits) - 1); }
inline u128 mask_bits128(int nbits) { return nbits >= 128 ? ~u128(0) : ((u128(1) << nbits) - 1); }

// Pack 0/1 bytes into 64-bit words and back.
std::vector<u64> pack_bits(const BitVec& b);
BitVec unpack_bits(const std::vector<u64>& w, std::size_t n);

// Raw little-endian (host order) conversion of word vectors.
Bytes to_bytes(const std::vector<u64>& v);
std::vector<u64> from_bytes(const Bytes& b);

// Fixed-width little-endian helpers for serialisation.
void put_u64(Bytes& out, u64 v);
u64 get_u64(const Bytes& in, std::size_t& pos);

}  // namespace ag
