#include "anongbdt/bits.hpp"

namespace ag {

void BitWriter::put(u64 v, int nbits) {
  if (nbits <= 0) return;
  v &= mask_bits(nbits);
  bits_ += nbits;
  while (nbits > 0) {
    int space = 64 - fill_;
    int take = nbits < space ? nbits : space;
    acc_ |= (take == 64 ? v : (v & mask_bits(take))) << fill_;
    fill_ += take;
    nbits -= take;
    v = take == 64 ? 0 : v >> take;
    if (fill_ == 64) {
      const u8* p = reinterpret_cast<const u8*>(&acc_);
      out_.insert(out_.end(), p, p + 8);
      acc_ = 0;
      fill_ = 0;
    }
  }
}

void BitWriter::put128(u128 v, int nbits) {
  if (nbits > 64) {
    put(u64(v), 64);
    put(u64(v >> 64), nbits - 64);
  } else {
    put(u64(v), nbits);
  }
}

void BitWriter::put_bytes(const void* p, std::size_t n) {
  const u8* b = static_cast<const u8*>(p);
  if (fill_ == 0) {
    out_.insert(out_.end(), b, b + n);
    bits_ += 8 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) put(b[i], 8);
}

Bytes BitWriter::finish() && {
  int nbytes = (fill_ + 7) / 8;
  const u8* p = reinterpret_cast<const u8*>(&acc_);
  out_.insert(out_.end(), p, p + nbytes);
  return std::move(out_);
}

u64 BitReader::get(int nbits) {
  if (nbits <= 0) return 0;
  if (pos_ + nbits > in_.size() * 8) throw std::out_of_range("BitReader: read past end");
  u64 v = 0;
  int got = 0;
  while (got < nbits) {
    std::size_t byte = pos_ >> 3;
    int off = pos_ & 7;
    if (off == 0 && nbits - got >= 8) {
      v |= u64(in_[byte]) << got;
      got += 8;
      pos_ += 8;
      continue;
    }
    int take = std::min(8 - off, nbits - got);
    v |= u64((in_[byte] >> off) & ((1u << take) - 1)) << got;
    got += take;
    pos_ += take;
  }
  return v;
}

u128 BitReader::get128(int nbits) {
  if (nbits > 64) {
    u128 lo = get(64);
    return lo | (u128(get(nbits - 64)) << 64);
  }
  return get(nbits);
}

void BitReader::get_bytes(void* p, std::size_t n) {
  u8* b = static_cast<u8*>(p);
  if ((pos_ & 7) == 0) {
    if (pos_ / 8 + n > in_.size()) throw std::out_of_range("BitReader: read past end");
    std::memcpy(b, in_.data() + pos_ / 8, n);
    pos_ += 8 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) b[i] = u8(get(8));
}

std::vector<u64> pack_bits(const BitVec& b) {
  std::vector<u64> w((b.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < b.size(); ++i) w[i >> 6] |= u64(b[i] & 1) << (i & 63);
  return w;
}

BitVec unpack_bits(const std::vector<u64>& w, std::size_t n) {
  BitVec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (w[i >> 6] >> (i & 63)) & 1;
  return b;
}

Bytes to_bytes(const std::vector<u64>& v) {
  Bytes b(v.size() * 8);
  if (!v.empty()) std::memcpy(b.data(), v.data(), b.size());
  return b;
}

std::vector<u64> from_bytes(const Bytes& b) {
  if (b.size() % 8) throw std::invalid_argument("from_bytes: size not a multiple of 8");
  std::vector<u64> v(b.size() / 8);
  if (!v.empty()) std::memcpy(v.data(), b.data(), b.size());
  return v;
}

void put_u64(Bytes& out, u64 v) {
  for (int i = 0; i < 8; ++i) out.push_back(u8(v >> (8 * i)));
}

u64 get_u64(const Bytes& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw std::out_of_range("get_u64: read past end");
  u64 v = 0;
  for (int i = 0; i < 8; ++i) v |= u64(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace ag
