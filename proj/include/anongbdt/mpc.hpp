#pragma once
#include <mutex>
#include <string>
#include <vector>

#include "anongbdt/dealer.hpp"
#include "anongbdt/fixed.hpp"
#include "anongbdt/transport.hpp"

namespace ag {

struct OpCounters {
  u64 ot = 0;          // OT invocations (1-out-of-n counts as one)
  u64 mul = 0;         // Beaver multiplications
  u64 and_gates = 0;   // boolean AND gates
  u64 mux = 0;
  u64 greater = 0;
  u64 equal = 0;
  u64 trunc = 0;
  u64 opprf_calls = 0;
  u64 opprf_queries = 0;
  u64 keyswitch = 0;
  u64 automorphism = 0;
};

// Every plaintext value revealed by a protocol to a party is recorded here.
struct RevealEntry {
  std::string kind;    // e.g. "owner_bit", "owner_split", "inference_output"
  int to_party;        // -1: both parties
  std::vector<i64> values;
  std::string context;
};

class RevealLog {
 public:
  void add(RevealEntry e);
  std::vector<RevealEntry> entries() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<RevealEntry> entries_;
};

struct Party {
  Party(int id, Channel& ch, u64 dealer_seed, u64 local_seed, RevealLog* log = nullptr);
  int id;
  Channel& ch;
  Dealer dealer;
  Prg rng;
  FixedParams fp;
  OpCounters ctr;
  RevealLog* log;

  void send(Tag t, const Bytes& b) { ch.send(t, b); }
  Bytes recv(Tag t) { return ch.recv(t); }
  // Simultaneous exchange ordered to avoid deadlock on stream transports.
  Bytes exchange(Tag t, const Bytes& mine);
  void reveal(const std::string& kind, int to_party, std::vector<i64> values, const std::string& ctx);
};

using Shares = std::vector<u64>;

// ---- openings (internal use; not logged as reveals) ----
Shares open_arith(Party& P, const Shares& x, Tag tag = Tag::Open);
BitVec open_bits(Party& P, const BitVec& x, Tag tag = Tag::Open);

// ---- oblivious transfer ----
// Chosen-message 1-out-of-n OT. `msgs` holds count*n entries (sender), `choices` count entries (receiver).
void ot_send(Party& P, u32 n, int width, const std::vector<u128>& msgs, Tag tag = Tag::Ot);
std::vector<u128> ot_recv(Party& P, u32 n, int width, const std::vector<u32>& choices, Tag tag = Tag::Ot);
// Both parties send one batch and receive one batch (equal sizes) in two rounds.
std::vector<u128> ot_both_ways(Party& P, u32 n, int width, const std::vector<u128>& msgs,
                               const std::vector<u32>& choices, Tag tag);

// ---- arithmetic ----
Shares mul(Party& P, const Shares& x, const Shares& y, Tag tag = Tag::Mul);
// Exact floor(x / 2^shift) for |x| < 2^62 (one wrap correction plus a low-bit carry).
Shares trunc_exact(Party& P, const Shares& x, int shift);
Shares mul_fixed(Party& P, const Shares& x, const Shares& y);
// Multiply by a public fixed-point constant and truncate.
Shares mul_const_fixed(Party& P, const Shares& x, double c);
Shares const_share(const Party& P, std::size_t n, u64 value);  // party 0 holds value, party 1 zero

// ---- boolean ----
BitVec and_bits(Party& P, const BitVec& x, const BitVec& y);
BitVec or_bits(Party& P, const BitVec& x, const BitVec& y);
// Arithmetic share of a shared bit.
Shares b2a(Party& P, const BitVec& b);

// ---- selection ----
Shares mux(Party& P, const BitVec& b, const Shares& y);
// One OT pair carries both values: halves the OT count for paired vectors.
std::pair<Shares, Shares> mux2(Party& P, const BitVec& b, const Shares& y, const Shares& z);

// ---- comparison ----
// Party 0 supplies a, party 1 supplies b (each nbits wide); output shares of 1{a > b}.
BitVec millionaire(Party& P, const std::vector<u64>& mine, int nbits);
// Party 0 supplies a, party 1 supplies b; output shares of 1{a == b}.
BitVec equal_private(Party& P, const std::vector<u64>& mine, int nbits);
// Signed comparisons; require |x - y| < 2^63.
BitVec greater(Party& P, const Shares& x, const Shares& y);
BitVec greater_pub(Party& P, const Shares& x, const std::vector<u64>& t);
BitVec equal(Party& P, const Shares& x, const Shares& y);
BitVec equal_zero(Party& P, const Shares& x);
// 1{x > t_k} for several public thresholds that agree on their low `shared_bits`
// bits; the low-block comparisons are computed once. Result is [k * n + i].
BitVec greater_pub_shared_low(Party& P, const Shares& x, const std::vector<u64>& thresholds, int shared_bits);

// ---- argmax / division / sigmoid ----
// Shared index of the maximum; ties go to the lowest index.
Shares argmax(Party& P, const Shares& v);

struct DivParams {
  int kmin = -10;    // denominators are at least 2^kmin
  int kmax = 20;     // denominators are below 2^(kmax+1)
  int iterations = 5;
  int guard = 0;     // extra fractional bits on the numerator; quotients must stay below 2^(22-guard)
};
// x / y for y > 0 in fixed point; y is normalised into [0.5, 1) without revealing anything.
Shares div(Party& P, const Shares& x, const Shares& y, const DivParams& dp);

struct SigmoidParams {
  double mu = 5.625;
  int J = 3;
  int L = 3;
  int delta = 4;
  std::vector<double> a;  // a[0] .. a[J]
  static SigmoidParams ours();
  static SigmoidParams squirrel();
  static SigmoidParams printed();  // coefficients as printed, period 2^(L+1) with L = 4
};
// Plaintext value of the clipped Fourier approximation.
double sigmoid_approx(double x, const SigmoidParams& sp);
Shares sigmoid(Party& P, const Shares& x, const SigmoidParams& sp);

}  // namespace ag
