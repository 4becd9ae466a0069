#pragma once
#include <atomic>
#include <map>
#include <memory>
#include <vector>

#include "anongbdt/bits.hpp"
#include "anongbdt/prng.hpp"

namespace ag {

struct HeParams {
  int N = 2048;
  int N_small = 1024;
  int logQ = 109;
  int ell = 64;
  int gadget_log = 20;
  int cbd_k = 21;  // centered binomial error, sigma = sqrt(k/2)
  static HeParams desk() { return {}; }
  static HeParams paper() {
    HeParams p;
    p.N = 8192;
    p.N_small = 4096;
    return p;
  }
  int log_delta() const { return logQ - ell; }
  int digits() const { return (logQ + gadget_log - 1) / gadget_log; }
  void validate() const;
};

using Poly = std::vector<u128>;  // coefficients in Z_Q
using SmallPoly = std::vector<i64>;

struct Rlwe {
  Poly a, b;
  std::size_t dim() const { return b.size(); }
};

// Decrypts as b - <a, s>.
struct Lwe {
  Poly a;
  u128 b = 0;
};

// Negacyclic NTT over three primes just below 2^61. Multiplying a Z_Q polynomial by one with small
// coefficients is exact because the integer convolution stays below half the CRT modulus.
class NttRing {
 public:
  static constexpr int kPrimes = 3;
  using Ntt = std::vector<u64>;  // kPrimes blocks of n residues

  explicit NttRing(int n);
  ~NttRing();
  NttRing(const NttRing&) = delete;
  NttRing& operator=(const NttRing&) = delete;

  int n() const { return n_; }
  Ntt forward_big(const Poly& x) const;
  Ntt forward_small(const SmallPoly& x) const;
  Poly inverse(const Ntt& x, u128 qmask) const;
  void mul_acc(Ntt& acc, const Ntt& x, const Ntt& y) const;
  Ntt mul(const Ntt& x, const Ntt& y) const;
  u64 prime(int i) const;

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

struct HeCounters {
  std::atomic<u64> keyswitch{0};
  std::atomic<u64> automorphism{0};
};

class HeContext {
 public:
  explicit HeContext(const HeParams& p = {});
  const HeParams& params() const { return p_; }
  u128 qmask() const { return qmask_; }
  const NttRing& ring(int dim) const;
  HeCounters& counters() const { return ctr_; }

 private:
  HeParams p_;
  u128 qmask_;
  std::unique_ptr<NttRing> big_, small_;
  mutable HeCounters ctr_;
};

struct SecretKey {
  SmallPoly s_big, s_small;
  NttRing::Ntt s_big_ntt, s_small_ntt;
  const NttRing::Ntt& ntt(int dim, const HeContext& ctx) const {
    return dim == ctx.params().N ? s_big_ntt : s_small_ntt;
  }
};

// Gadget key switch from a source secret to the big secret. The a-parts are expanded from `seed`.
struct KeySwitchKey {
  Key seed{};
  std::vector<Poly> b;  // coefficient form, for serialization
  std::vector<NttRing::Ntt> a_ntt, b_ntt;
};

// Encryption of zero, used to re-randomize ciphertexts without the secret key.
struct PublicKey {
  Key seed{};
  Poly b;
  NttRing::Ntt a_ntt, b_ntt;
};

struct EvalKeys {
  KeySwitchKey lift;                    // derived small secret -> big secret
  std::map<u32, KeySwitchKey> autos;    // Galois element -> key
  PublicKey pk_big, pk_small;
};

struct KeyMaterial {
  SecretKey sk;
  EvalKeys ev;
};

// Automorphism keys are generated for every g = 2^j + 1, j = 1..log2(N).
KeyMaterial keygen(const HeContext& ctx, Prg& rng);
Bytes serialize_eval(const HeContext& ctx, const EvalKeys& ev);
EvalKeys deserialize_eval(const HeContext& ctx, const Bytes& in);

Bytes serialize_rlwe(const HeContext& ctx, const Rlwe& ct);
Rlwe deserialize_rlwe(const HeContext& ctx, const Bytes& in);

// Plaintext m is placed at scale 2^log_scale (the default is Delta = Q / 2^ell).
Rlwe rlwe_encrypt(const HeContext& ctx, const SecretKey& sk, int dim, const std::vector<u64>& m, int log_scale,
                  Prg& rng);
// Same, with the a-part expanded from a seed (the seed is returned through `seed`).
Rlwe rlwe_encrypt_seeded(const HeContext& ctx, const SecretKey& sk, int dim, const std::vector<u64>& m,
                         int log_scale, Prg& rng, Key& seed);
Poly expand_uniform(const HeContext& ctx, const Key& seed, int dim);
Poly rlwe_phase(const HeContext& ctx, const SecretKey& sk, const Rlwe& ct);
std::vector<u64> rlwe_decrypt(const HeContext& ctx, const SecretKey& sk, const Rlwe& ct, int log_scale);

Lwe lwe_encrypt(const HeContext& ctx, const SecretKey& sk, int dim, u64 m, int log_scale, Prg& rng);
u128 lwe_phase(const HeContext& ctx, const SecretKey& sk, const Lwe& ct);
u64 lwe_decrypt(const HeContext& ctx, const SecretKey& sk, const Lwe& ct, int log_scale);
u64 decode_phase(const HeContext& ctx, u128 phase, int log_scale);

void add_inplace(const HeContext& ctx, Rlwe& x, const Rlwe& y);
void sub_inplace(const HeContext& ctx, Rlwe& x, const Rlwe& y);
void add_inplace(const HeContext& ctx, Lwe& x, const Lwe& y);
void sub_inplace(const HeContext& ctx, Lwe& x, const Lwe& y);
Rlwe mul_monomial(const HeContext& ctx, const Rlwe& x, int k);
Rlwe shl(const HeContext& ctx, const Rlwe& x, int bits);

Lwe extract_lwe(const HeContext& ctx, const Rlwe& ct, int i);
// acc += extract_lwe(ct, i) without materializing the extracted vector.
void extract_accumulate(const HeContext& ctx, const Rlwe& ct, int i, Lwe& acc);
Rlwe lwe_to_rlwe(const HeContext& ctx, const Lwe& ct);

Poly apply_automorphism(const HeContext& ctx, const Poly& x, u32 g);
Rlwe key_switch(const HeContext& ctx, const Rlwe& ct, const KeySwitchKey& ksk);
Rlwe eval_auto(const HeContext& ctx, const Rlwe& ct, u32 g, const EvalKeys& ev);
KeySwitchKey make_ksk(const HeContext& ctx, const SmallPoly& source, const SecretKey& target, Prg& rng);
SmallPoly derived_small_secret(const HeContext& ctx, const SmallPoly& s_small);

// Baseline pipeline: lift each LWE to dimension N, then pack with the automorphism recursion.
Lwe lwe_dim_lift(const HeContext& ctx, const Lwe& ct, const EvalKeys& ev);
Rlwe pack_lwes(const HeContext& ctx, const std::vector<Lwe>& cts, const EvalKeys& ev);
// Fast pipeline: adjacent small-dimension LWEs form one ring-N ciphertext, then those are merged.
Rlwe fast_pack_pair(const HeContext& ctx, const Lwe& even, const Lwe& odd, const EvalKeys& ev);
Rlwe fast_pack_lwes(const HeContext& ctx, const std::vector<Lwe>& cts, const EvalKeys& ev);
// Each input occupies coefficients that are multiples of `stride`.
Rlwe pack_rlwes(const HeContext& ctx, const std::vector<Rlwe>& cts, int stride, const EvalKeys& ev);

// Coefficient that holds input i after packing `count` ciphertexts. Both paths scale messages by count.
std::vector<int> slot_map_baseline(int N, int count);
std::vector<int> slot_map_fast(int N, int count);
std::vector<int> slot_map_rlwes(int N, int count, int stride, const std::vector<int>& input_slots);

void nullify_garbage(const HeContext& ctx, Rlwe& ct, const std::vector<int>& occupied, Prg& rng);
// Adds an encryption of zero under the key owner's public key.
void rerandomize(const HeContext& ctx, Rlwe& ct, const PublicKey& pk, Prg& rng);

}  // namespace ag
