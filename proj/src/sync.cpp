#include <algorithm>
#include <stdexcept>

#include "anongbdt/sync.hpp"

namespace ag {

namespace {

BitVec xor_vec(const BitVec& a, const BitVec& b) {
  BitVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] ^ b[i];
  return r;
}

}  // namespace

// Owner's direct sharing of a plaintext vector: it keeps r and sends v ^ r.
BitVec share_plain(Party& P, int owner, const BitVec* v, std::size_t n, Tag tag) {
  if (P.id == owner) {
    if (!v || v->size() != n) throw std::invalid_argument("sync: owner assignment has the wrong length");
    BitVec r(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = u8(P.rng.bit());
      d[i] = (*v)[i] ^ r[i];
    }
    P.send(tag, to_bytes(pack_bits(d)));
    return r;
  }
  return unpack_bits(from_bytes(P.recv(tag)), n);
}

Children ois(Party& P, int owner, const BitVec& parent, const BitMatrix& Mt1, const BitVec* bstar, int row) {
  const std::size_t m = parent.size();
  if (owner != 0 && owner != 1) throw std::invalid_argument("ois: bad owner");
  BitVec bs;
  if (owner == 0) {
    bs = share_plain(P, 0, bstar, m, Tag::SyncOis);
  } else {
    if (Mt1.cols != m) throw std::invalid_argument("ois: matrix shares do not match the indicator length");
    const u32 rows = u32(Mt1.rows);
    bs.resize(m);
    if (P.id == 0) {
      std::vector<u128> msgs(m * rows);
      for (std::size_t i = 0; i < m; ++i) {
        bs[i] = u8(P.rng.bit());
        for (u32 j = 0; j < rows; ++j) msgs[i * rows + j] = u128(bs[i] ^ Mt1.at(j, i));
      }
      ot_send(P, rows, 1, msgs, Tag::SyncOis);
    } else {
      if (row < 0 || u32(row) >= rows) throw std::out_of_range("ois: split row out of range");
      auto got = ot_recv(P, rows, 1, std::vector<u32>(m, u32(row)), Tag::SyncOis);
      for (std::size_t i = 0; i < m; ++i) bs[i] = u8(got[i] & 1) ^ Mt1.at(row, i);
    }
  }
  Children c;
  c.left = and_bits(P, bs, parent);
  c.right = xor_vec(c.left, parent);
  return c;
}

std::vector<u64> transfer_rows(Party& P, const Alignment& a, const std::vector<u64>* words, int width, Tag tag) {
  if (width < 1 || width > 64) throw std::invalid_argument("transfer_rows: width must be 1..64");
  const std::size_t m = a.m;
  std::vector<u64> out(m);
  if (P.id == a.receiver) {
    if (m == 0) return out;
    return opprf_recv(P, receiver_queries(a.ch), a.load, width, tag);
  }
  if (!words) throw std::invalid_argument("transfer_rows: sender needs row words");
  if (m == 0) return out;
  OpprfProgram prog = sender_program(a.sh, width);
  const std::size_t L = a.sh.max_load;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = P.rng.next() & mask_bits(width);
    for (std::size_t t = 0; t < L; ++t) {
      int r = a.sh.row[i * L + t];
      if (r >= 0) prog.vals[i * L + t] = ((*words)[r] & mask_bits(width)) ^ out[i];
    }
  }
  opprf_send(P, prog, tag);
  return out;
}

std::vector<NodeChildren> bois(Party& P, int owner, const std::array<Alignment, 2>& A,
                               const std::vector<NodeSync>& nodes) {
  if (owner != 0 && owner != 1) throw std::invalid_argument("bois: bad owner");
  if (nodes.empty()) return {};
  const int c = owner, o = 1 - owner;
  const std::size_t mc = A[c].m, mo = A[o].m;
  int width = 0;
  u64 used = 0;
  for (const auto& nd : nodes) {
    if (nd.pos < 0 || nd.pos >= 64) throw std::invalid_argument("bois: batch exceeds the 64-bit word");
    if (used >> nd.pos & 1) throw std::invalid_argument("bois: duplicate bit position");
    used |= u64(1) << nd.pos;
    width = std::max(width, nd.pos + 1);
    if (nd.parent[c].size() != mc || nd.parent[o].size() != mo) throw std::invalid_argument("bois: indicator length");
  }
  const std::size_t K = nodes.size();

  // Owner's own instance: direct sharing of all assignments in one message.
  BitVec all;
  if (P.id == c) {
    all.reserve(K * mc);
    for (const auto& nd : nodes) all.insert(all.end(), nd.bstar.begin(), nd.bstar.end());
  }
  BitVec own = share_plain(P, c, P.id == c ? &all : nullptr, K * mc, Tag::SyncBois);

  // Other instance: reorder to rows, pack, transfer.
  std::vector<u64> words;
  if (P.id == c) {
    const CuckooTable& ch = A[c].ch;
    int rows = 0;
    for (int r : ch.row) rows = std::max(rows, r + 1);
    for (int r : A[o].sh.row) rows = std::max(rows, r + 1);
    words.assign(std::size_t(rows), 0);
    for (const auto& nd : nodes)
      for (std::size_t j = 0; j < mc; ++j)
        if (ch.row[j] >= 0 && nd.bstar[j]) words[ch.row[j]] |= u64(1) << nd.pos;
  }
  std::vector<u64> packed = transfer_rows(P, A[o], P.id == c ? &words : nullptr, width, Tag::SyncBois);

  // One AND over both instances and all nodes.
  BitVec x, y;
  x.reserve(K * (mc + mo));
  y.reserve(K * (mc + mo));
  for (std::size_t k = 0; k < K; ++k) {
    x.insert(x.end(), own.begin() + k * mc, own.begin() + (k + 1) * mc);
    y.insert(y.end(), nodes[k].parent[c].begin(), nodes[k].parent[c].end());
    for (std::size_t i = 0; i < mo; ++i) x.push_back(u8(packed[i] >> nodes[k].pos & 1));
    y.insert(y.end(), nodes[k].parent[o].begin(), nodes[k].parent[o].end());
  }
  BitVec z = and_bits(P, x, y);
  std::vector<NodeChildren> out(K);
  std::size_t at = 0;
  for (std::size_t k = 0; k < K; ++k) {
    for (int inst : {c, o}) {
      const std::size_t m = inst == c ? mc : mo;
      Children& ch = out[k].inst[inst];
      ch.left.assign(z.begin() + at, z.begin() + at + m);
      ch.right = xor_vec(ch.left, nodes[k].parent[inst]);
      at += m;
    }
  }
  return out;
}

NodeChildren oois(Party& P, int owner, const std::array<Alignment, 2>& A, const NodeSync& node) {
  NodeSync n = node;
  n.pos = 0;
  return bois(P, owner, A, {n})[0];
}

}  // namespace ag
