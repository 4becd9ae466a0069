#pragma once
#include "anongbdt/he.hpp"
#include "anongbdt/mpc.hpp"

namespace ag {

struct HeSession {
  const HeContext* ctx = nullptr;
  KeyMaterial mine;
  EvalKeys peer;  // the other party's evaluation keys
};

// Each party generates its own keys and sends its evaluation keys to the other.
HeSession he_setup(Party& P, const HeContext& ctx);

// Arithmetic shares to ciphertexts held by `holder`, encrypted under the other party's key.
// Value i goes to ciphertext i / N_small, coefficient i % N_small. Returns {} at the key holder.
std::vector<Rlwe> a2h(Party& P, const HeSession& S, int holder, const Shares& v, int log_scale);
// Packs g into coefficients [0, N_small/2) and h into [N_small/2, N_small) of each ciphertext.
std::vector<Rlwe> a2h_gh(Party& P, const HeSession& S, int holder, const Shares& g, const Shares& h,
                         int log_scale);
// Ciphertext (at `holder`) to shares of the plaintext at the listed coefficients, decoded at scale Delta.
// `ct` is ignored at the key holder, which needs only the dimension and slot count.
Shares h2a(Party& P, const HeSession& S, int holder, const Rlwe* ct, int dim, const std::vector<int>& slots);

// Rows of the one-hot bin matrix: bin[f][i] in [0, B) is sample i's bin for feature f, -1 excludes the sample.
struct BinLayout {
  int features = 0;
  int B = 0;
  std::vector<std::vector<int>> bin;
};

// log2 of the padded packing count for features * B bins (g and h interleaved).
int bmv_tau(int features, int B);
// Returns shares of [G(f, b) for f*B+b ; H(f, b) ...], length 2 * features * B. The holder passes the
// a2h_gh ciphertexts (scale Delta / 2^tau) and its layout; the key holder passes nullptrs.
Shares bin_mat_vec(Party& P, const HeSession& S, int holder, const std::vector<Rlwe>* enc_gh,
                   const BinLayout* layout, int features, int B);

}  // namespace ag
