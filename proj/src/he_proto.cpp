#include <stdexcept>

#include "anongbdt/he_proto.hpp"

namespace ag {

HeSession he_setup(Party& P, const HeContext& ctx) {
  HeSession S;
  S.ctx = &ctx;
  Key k{};
  P.rng.fill(k.data(), k.size());
  Prg g(k);
  S.mine = keygen(ctx, g);
  Bytes theirs = P.exchange(Tag::HeKeys, serialize_eval(ctx, S.mine.ev));
  S.peer = deserialize_eval(ctx, theirs);
  return S;
}

std::vector<Rlwe> a2h(Party& P, const HeSession& S, int holder, const Shares& v, int log_scale) {
  const HeContext& ctx = *S.ctx;
  const int Ns = ctx.params().N_small;
  const std::size_t nct = (v.size() + Ns - 1) / Ns;
  if (P.id != holder) {
    Bytes out;
    for (std::size_t c = 0; c < nct; ++c) {
      std::vector<u64> m(v.begin() + c * Ns, v.begin() + std::min(v.size(), (c + 1) * Ns));
      Key seed;
      Rlwe ct = rlwe_encrypt_seeded(ctx, S.mine.sk, Ns, m, log_scale, P.rng, seed);
      out.insert(out.end(), seed.begin(), seed.end());
      BitWriter w;
      for (const u128& b : ct.b) w.put128(b, ctx.params().logQ);
      Bytes body = std::move(w).finish();
      out.insert(out.end(), body.begin(), body.end());
    }
    P.send(Tag::HeA2H, out);
    return {};
  }
  Bytes in = P.recv(Tag::HeA2H);
  const std::size_t body = (std::size_t(Ns) * ctx.params().logQ + 7) / 8;
  if (in.size() != nct * (32 + body)) throw ProtocolError("a2h: unexpected payload size");
  std::vector<Rlwe> cts;
  for (std::size_t c = 0; c < nct; ++c) {
    const u8* p = in.data() + c * (32 + body);
    Key seed;
    std::copy(p, p + 32, seed.begin());
    Rlwe ct;
    ct.a = expand_uniform(ctx, seed, Ns);
    Bytes blob(p + 32, p + 32 + body);
    BitReader r(blob);
    ct.b.resize(Ns);
    for (auto& b : ct.b) b = r.get128(ctx.params().logQ);
    for (int i = 0; i < Ns && c * Ns + i < v.size(); ++i)
      ct.b[i] = (ct.b[i] + (u128(v[c * Ns + i]) << log_scale)) & ctx.qmask();
    cts.push_back(std::move(ct));
  }
  return cts;
}

std::vector<Rlwe> a2h_gh(Party& P, const HeSession& S, int holder, const Shares& g, const Shares& h,
                         int log_scale) {
  if (g.size() != h.size()) throw std::invalid_argument("a2h_gh: length mismatch");
  const std::size_t half = S.ctx->params().N_small / 2;
  const std::size_t nct = std::max<std::size_t>(1, (g.size() + half - 1) / half);
  Shares v(nct * 2 * half, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t c = i / half, k = i % half;
    v[c * 2 * half + k] = g[i];
    v[c * 2 * half + half + k] = h[i];
  }
  return a2h(P, S, holder, v, log_scale);
}

Shares h2a(Party& P, const HeSession& S, int holder, const Rlwe* ct, int dim, const std::vector<int>& slots) {
  const HeContext& ctx = *S.ctx;
  const int ld = ctx.params().log_delta();
  if (P.id == holder) {
    if (!ct || int(ct->dim()) != dim) throw std::invalid_argument("h2a: holder needs a ciphertext");
    Rlwe c = *ct;
    rerandomize(ctx, c, dim == ctx.params().N ? S.peer.pk_big : S.peer.pk_small, P.rng);
    nullify_garbage(ctx, c, slots, P.rng);
    Shares mine(slots.size());
    const u128 q4 = u128(1) << (ld - 2);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      u64 rho = P.rng.next();
      u128 lambda = q4 + (P.rng.next128() & ((u128(1) << (ld - 1)) - 1));
      c.b[slots[k]] = (c.b[slots[k]] + (u128(rho) << ld) + lambda) & ctx.qmask();
      mine[k] = 0 - rho;
    }
    P.send(Tag::HeH2A, serialize_rlwe(ctx, c));
    return mine;
  }
  Rlwe c = deserialize_rlwe(ctx, P.recv(Tag::HeH2A));
  if (int(c.dim()) != dim) throw ProtocolError("h2a: dimension mismatch");
  Poly ph = rlwe_phase(ctx, S.mine.sk, c);
  Shares mine(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) mine[k] = u64(ph[slots[k]] >> ld);
  return mine;
}

int bmv_tau(int features, int B) {
  int cnt = 2 * features * B, tau = 1;
  while ((1 << tau) < cnt) ++tau;
  return tau;
}

Shares bin_mat_vec(Party& P, const HeSession& S, int holder, const std::vector<Rlwe>* enc_gh,
                   const BinLayout* layout, int features, int B) {
  const HeContext& ctx = *S.ctx;
  const int N = ctx.params().N, Ns = ctx.params().N_small;
  const int tau = bmv_tau(features, B);
  const std::size_t nb = std::size_t(features) * B;
  if ((1 << tau) > N) throw std::invalid_argument("bin_mat_vec: too many bins for the ring");
  std::vector<int> slots = slot_map_fast(N, 1 << tau);
  slots.resize(2 * nb);
  Shares inter;
  if (P.id == holder) {
    if (!enc_gh || !layout || layout->features != features || layout->B != B || int(layout->bin.size()) != features)
      throw std::invalid_argument("bin_mat_vec: holder needs ciphertexts and a matching layout");
    const std::size_t half = Ns / 2;
    std::vector<Lwe> acc(std::size_t(1) << tau, Lwe{Poly(Ns, 0), 0});
    for (int f = 0; f < features; ++f) {
      const auto& bins = layout->bin[f];
      if (bins.size() > enc_gh->size() * half) throw std::invalid_argument("bin_mat_vec: layout longer than input");
      for (std::size_t s = 0; s < bins.size(); ++s) {
        const int k = bins[s];
        if (k < 0) continue;
        if (k >= B) throw std::out_of_range("bin_mat_vec: bin index");
        const Rlwe& ct = (*enc_gh)[s / half];
        const int i = int(s % half);
        const std::size_t j = std::size_t(f) * B + k;
        extract_accumulate(ctx, ct, i, acc[2 * j]);
        extract_accumulate(ctx, ct, int(half) + i, acc[2 * j + 1]);
      }
    }
    Rlwe packed = fast_pack_lwes(ctx, acc, S.peer);
    P.ctr.keyswitch += (u64(1) << tau) - 1;
    P.ctr.automorphism += (u64(1) << (tau - 1)) - 1;
    inter = h2a(P, S, holder, &packed, N, slots);
  } else {
    inter = h2a(P, S, holder, nullptr, N, slots);
  }
  Shares out(2 * nb);
  for (std::size_t j = 0; j < nb; ++j) {
    out[j] = inter[2 * j];
    out[nb + j] = inter[2 * j + 1];
  }
  return out;
}

}  // namespace ag
