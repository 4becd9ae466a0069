#pragma once
#include <array>
#include <vector>

#include "anongbdt/mpc.hpp"

namespace ag {

// Reserved identifiers: padding entries in simple-hash buckets and the query used for empty cuckoo buckets.
constexpr u64 kPadItem = ~u64(0);
constexpr u64 kEmptyQuery = ~u64(0) - 1;

struct HashingParams {
  int e = 3;
  double epsilon = 1.3;
  int kappa = 40;
  u64 seed = 0;
};

std::size_t table_size(std::size_t n, const HashingParams& hp);
// Candidate bucket of `item` under hash function `which`.
std::size_t bucket_of(u64 item, int which, std::size_t m, const HashingParams& hp);

struct CuckooTable {
  std::size_t m = 0;
  std::vector<u64> item;  // kPadItem when empty
  std::vector<int> hidx;  // hash function that placed the item, -1 when empty
  std::vector<int> row;   // index of the item in the input list, -1 when empty
  std::size_t occupied() const;
};

struct SimpleTable {
  std::size_t m = 0;
  std::size_t max_load = 0;  // public; every bucket is padded to this many entries
  // Entry t of bucket j is at j * max_load + t.
  std::vector<u64> item;
  std::vector<int> hidx;
  std::vector<int> row;
};

struct HashingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws HashingFailure when an insertion exceeds 500 * ceil(log2 n) relocations.
CuckooTable build_cuckoo(const std::vector<u64>& ids, std::size_t m, const HashingParams& hp);
// Public bucket-load bound for `n` sender items: exceeded with probability below 2^-kappa.
std::size_t simple_max_load(std::size_t n, std::size_t m, const HashingParams& hp);
SimpleTable build_simple(const std::vector<u64>& ids, std::size_t m, const HashingParams& hp);

// OPPRF key of an item placed by hash function `hidx`.
u64 opprf_keyword(u64 item, int hidx);

// Batched OPPRF, one program per bucket. Values are `width` bits wide (any width), stored in
// ceil(width / 64) words. The receiver obtains the programmed value for programmed keys and a
// pseudorandom value otherwise.
struct OpprfProgram {
  std::size_t buckets = 0;
  std::size_t max_load = 0;
  int width = 0;
  // Entry t of bucket j: keys[j * max_load + t], value words at vals[(j * max_load + t) * words + w].
  // Unused entries have key kPadItem.
  std::vector<u64> keys;
  std::vector<u64> vals;
  int words() const { return (width + 63) / 64; }
};
void opprf_send(Party& P, const OpprfProgram& prog, Tag tag = Tag::PsiOpprf);
// One query per bucket; returns `buckets * words` value words.
std::vector<u64> opprf_recv(Party& P, const std::vector<u64>& queries, std::size_t max_load, int width,
                            Tag tag = Tag::PsiOpprf);
// Per-bucket OPPRF keys of the receiver's cuckoo table and a sender program skeleton over its simple table.
std::vector<u64> receiver_queries(const CuckooTable& ch);
OpprfProgram sender_program(const SimpleTable& sh, int width);

// One alignment instance as seen by one party.
struct Alignment {
  int instance = 0;
  int receiver = 0;
  HashingParams hp;
  std::size_t m = 0;
  std::size_t load = 0;  // public simple-table load bound
  CuckooTable ch;  // filled at the receiver
  SimpleTable sh;  // filled at the sender
  BitVec b;        // shares of the root indicator, one per receiver bucket
  Shares y;        // shares of the arithmetic payload (empty when none was requested)
  int lprime = 0;  // OPPRF output length used for the membership test
};

struct PsiInput {
  std::vector<u64> ids;
  const std::vector<u64>* payload = nullptr;  // optional arithmetic payload, one per id
};

// Circuit PSI with the given receiver. If either party supplies a payload, `y` holds shares of
// the payload of the common item in each receiver bucket and 0 elsewhere.
Alignment circuit_psi(Party& P, int receiver, const PsiInput& in, const HashingParams& hp, int instance = 0);

// Two independent instances with swapped receivers; party 0 supplies the labels as payload in both.
std::array<Alignment, 2> dual_circuit_psi(Party& P, const PsiInput& in, const HashingParams& hp);

// Sender-side bit matrix payload (party 1 as sender): rows x items, stored row-major as bits.
struct BitMatrix {
  std::size_t rows = 0, cols = 0;
  BitVec bits;  // bits[r * cols + c]
  u8 at(std::size_t r, std::size_t c) const { return bits[r * cols + c]; }
};
struct BasePsiResult {
  Alignment inst;
  BitMatrix M1;   // XOR shares, columns in receiver bucket order
  BitMatrix Mt1;  // XOR shares of the prefix matrix
};
// Party 0 is the receiver with payload y; party 1 sends M and M~ (both rows x n1) as payload.
BasePsiResult base_circuit_psi(Party& P, const PsiInput& in, const BitMatrix* M, const BitMatrix* Mt,
                               const HashingParams& hp);

}  // namespace ag
