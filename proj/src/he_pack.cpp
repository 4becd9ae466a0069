#include <stdexcept>

#include "anongbdt/he.hpp"

namespace ag {

namespace {

bool pow2(std::size_t x) { return x && !(x & (x - 1)); }

// Offset added to input j's coefficients when `count` inputs of the given stride are merged.
int merge_offset(int j, int count, int stride) {
  int off = 0;
  for (int c = count; c > 1; c >>= 1) {
    off += (j & 1) * (stride / c);
    j >>= 1;
  }
  return off;
}

Rlwe merge(const HeContext& ctx, const std::vector<Rlwe>& cts, std::size_t lo, std::size_t step, std::size_t count,
           int stride, const EvalKeys& ev) {
  if (count == 1) return cts[lo];
  Rlwe E = merge(ctx, cts, lo, step * 2, count / 2, stride, ev);
  Rlwe O = merge(ctx, cts, lo + step, step * 2, count / 2, stride, ev);
  const int t = stride / int(count);
  const u32 g = u32(ctx.params().N / t + 1);
  Rlwe Ot = mul_monomial(ctx, O, t);
  Rlwe diff = E;
  sub_inplace(ctx, diff, Ot);
  add_inplace(ctx, E, Ot);
  add_inplace(ctx, E, eval_auto(ctx, diff, g, ev));
  return E;
}

// RLWE over dimension N holding (-a_even) + X^{N/2}(-a_odd), decrypting under the derived small secret.
Rlwe pair_under_derived(const HeContext& ctx, const Lwe& even, const Lwe* odd) {
  const int N = ctx.params().N, Ns = ctx.params().N_small;
  if (int(even.a.size()) != Ns || (odd && int(odd->a.size()) != Ns))
    throw std::invalid_argument("fast_pack_pair: inputs must have the small dimension");
  if (Ns != N / 2) throw std::invalid_argument("fast_pack_pair: requires N_small = N/2");
  const u128 m = ctx.qmask();
  Rlwe ct{Poly(N, 0), Poly(N, 0)};
  for (int k = 0; k < Ns; ++k) ct.a[k] = (0 - even.a[k]) & m;
  ct.b[0] = even.b;
  if (odd) {
    for (int k = 0; k < Ns; ++k) ct.a[N / 2 + k] = (0 - odd->a[k]) & m;
    ct.b[N / 2] = odd->b;
  }
  return ct;
}

}  // namespace

std::vector<int> slot_map_rlwes(int N, int count, int stride, const std::vector<int>& input_slots) {
  if (!pow2(count) || stride / count < 1) throw std::invalid_argument("slot_map: bad count");
  (void)N;
  std::vector<int> out;
  for (int j = 0; j < count; ++j) {
    int off = merge_offset(j, count, stride);
    for (int s : input_slots) out.push_back(s + off);
  }
  return out;
}

std::vector<int> slot_map_baseline(int N, int count) { return slot_map_rlwes(N, count, N, {0}); }

std::vector<int> slot_map_fast(int N, int count) {
  if (count < 2 || !pow2(count)) throw std::invalid_argument("slot_map_fast: count must be an even power of two");
  return slot_map_rlwes(N, count / 2, N / 2, {0, N / 2});
}

Lwe lwe_dim_lift(const HeContext& ctx, const Lwe& ct, const EvalKeys& ev) {
  Rlwe r = key_switch(ctx, pair_under_derived(ctx, ct, nullptr), ev.lift);
  return extract_lwe(ctx, r, 0);
}

Rlwe pack_rlwes(const HeContext& ctx, const std::vector<Rlwe>& cts, int stride, const EvalKeys& ev) {
  if (!pow2(cts.size())) throw std::invalid_argument("pack_rlwes: count must be a power of two");
  if (stride / int(cts.size()) < 1) throw std::invalid_argument("pack_rlwes: too many inputs for the stride");
  for (const auto& c : cts)
    if (int(c.dim()) != ctx.params().N) throw std::invalid_argument("pack_rlwes: inputs must have dimension N");
  return merge(ctx, cts, 0, 1, cts.size(), stride, ev);
}

Rlwe pack_lwes(const HeContext& ctx, const std::vector<Lwe>& cts, const EvalKeys& ev) {
  if (!pow2(cts.size()) || int(cts.size()) > ctx.params().N)
    throw std::invalid_argument("pack_lwes: count must be a power of two <= N");
  std::vector<Rlwe> r;
  r.reserve(cts.size());
  for (const auto& c : cts) {
    if (int(c.a.size()) != ctx.params().N) throw std::invalid_argument("pack_lwes: inputs must have dimension N");
    r.push_back(lwe_to_rlwe(ctx, c));
  }
  return pack_rlwes(ctx, r, ctx.params().N, ev);
}

Rlwe fast_pack_pair(const HeContext& ctx, const Lwe& even, const Lwe& odd, const EvalKeys& ev) {
  // Doubling here keeps the fast path on the same overall scale gain as the baseline.
  Rlwe ct = shl(ctx, pair_under_derived(ctx, even, &odd), 1);
  return key_switch(ctx, ct, ev.lift);
}

Rlwe fast_pack_lwes(const HeContext& ctx, const std::vector<Lwe>& cts, const EvalKeys& ev) {
  if (cts.size() < 2 || !pow2(cts.size()) || int(cts.size()) > ctx.params().N)
    throw std::invalid_argument("fast_pack_lwes: count must be an even power of two <= N");
  std::vector<Rlwe> pairs;
  pairs.reserve(cts.size() / 2);
  for (std::size_t j = 0; j < cts.size(); j += 2) pairs.push_back(fast_pack_pair(ctx, cts[j], cts[j + 1], ev));
  return pack_rlwes(ctx, pairs, ctx.params().N / 2, ev);
}

void nullify_garbage(const HeContext& ctx, Rlwe& ct, const std::vector<int>& occupied, Prg& rng) {
  std::vector<u8> keep(ct.dim(), 0);
  for (int s : occupied) {
    if (s < 0 || std::size_t(s) >= ct.dim()) throw std::out_of_range("nullify_garbage: slot out of range");
    keep[s] = 1;
  }
  for (std::size_t i = 0; i < ct.dim(); ++i)
    if (!keep[i]) ct.b[i] = (ct.b[i] + rng.next128()) & ctx.qmask();
}

}  // namespace ag
