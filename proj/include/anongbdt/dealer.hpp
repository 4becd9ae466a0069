#pragma once
#include <mutex>
#include <vector>

#include "anongbdt/bits.hpp"

namespace ag {

// One party's view of a trusted dealer. Both parties construct a view from the
// same seed; the k-th request of each kind expands to the same correlation on
// both sides and each side keeps its own half. Requests must therefore be made
// in the same order by the two parties, which the SPMD protocol code guarantees.
class Dealer {
 public:
  Dealer(u64 seed, int party);

  struct ArithTriples {
    std::vector<u64> a, b, c;
  };
  struct BoolTriples {  // packed 64 triples per word
    std::vector<u64> a, b, c;
  };
  // Random 1-out-of-n OT on width-bit strings (width <= 128).
  struct RotSender {
    u32 n = 0;
    int width = 0;
    std::size_t count = 0, words_per = 0;
    std::vector<u64> R;
    u128 get(std::size_t k, u32 j) const;
  };
  struct RotReceiver {
    std::vector<u32> c;
    std::vector<u128> Rc;
  };

  ArithTriples arith_triples(std::size_t n);
  BoolTriples bool_triples(std::size_t nwords);
  RotSender rot_sender(u32 n, int width, std::size_t count);
  RotReceiver rot_receiver(u32 n, int width, std::size_t count);
  // OPRF correlation: the sender obtains the PRF key, the receiver obtains PRF
  // outputs on its own queries. Both calls consume the same request index.
  Key oprf_key();
  std::vector<u64> oprf_eval(const std::vector<std::pair<u64, u64>>& queries);

  int party() const { return party_; }
  u64 requests() const { return arith_n_ + bool_n_ + rot_n_ + oprf_n_; }

  static u64 oprf(const Key& k, u64 bucket, u64 item);

 private:
  void expand_rot(u32 n, int width, std::size_t count, RotSender* s, RotReceiver* r);
  Key root_;
  int party_;
  u64 arith_n_ = 0, bool_n_ = 0, rot_n_ = 0, oprf_n_ = 0;
  std::mutex mu_;
};

}  // namespace ag
