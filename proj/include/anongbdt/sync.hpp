#pragma once
#include <array>

#include "anongbdt/psi.hpp"

namespace ag {

struct Children {
  BitVec left, right;
};

// Base design, one node. Vectors run over party 0's cuckoo buckets. `Mt1` holds this party's XOR
// shares of party 1's prefix matrix. Owner 0 passes its plaintext assignment in `bstar`; owner 1
// passes the matrix row z*B + u* in `row`. The other party passes nullptr / -1.
Children ois(Party& P, int owner, const BitVec& parent, const BitMatrix& Mt1, const BitVec* bstar, int row);

// OTSA synchronization of one node across both alignment instances.
struct NodeSync {
  int pos = 0;           // bit position in the packed transfer word, < 64
  BitVec parent[2];      // shares of the node indicator in instance 0 and 1
  BitVec bstar;          // owner only: plaintext assignment over its own instance's buckets
};
struct NodeChildren {
  Children inst[2];
};

// All nodes in `nodes` are owned by `owner`. One OPPRF call carries the packed assignments
// into the owner's sender instance.
std::vector<NodeChildren> bois(Party& P, int owner, const std::array<Alignment, 2>& A, const std::vector<NodeSync>& nodes);
// Single node with a one-bit transfer word.
NodeChildren oois(Party& P, int owner, const std::array<Alignment, 2>& A, const NodeSync& node);

// The owner keeps random bits r and sends v ^ r; the other party passes nullptr.
BitVec share_plain(Party& P, int owner, const BitVec* v, std::size_t n, Tag tag);

// Moves packed per-row words from the sender of instance `a` to shares over the receiver's buckets.
// The sender passes one word per input row (its ids order); the receiver passes nullptr.
std::vector<u64> transfer_rows(Party& P, const Alignment& a, const std::vector<u64>* words, int width, Tag tag);

}  // namespace ag
