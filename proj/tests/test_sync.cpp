#include <gtest/gtest.h>

#include <map>
#include <set>

#include "anongbdt/runner.hpp"
#include "anongbdt/sync.hpp"

using namespace ag;

namespace {

std::pair<BitVec, BitVec> share(const BitVec& v, u64 seed) {
  Prg g(seed, "test-share");
  return share_bool(v, g);
}

struct World {
  std::vector<u64> ids[2];
  std::array<Alignment, 2> A[2];  // [party][instance]
  std::map<u64, int> row[2];      // id -> row at each party
  BitVec root[2];                 // reconstructed root indicators per instance
};

World make_world(std::size_t n0, std::size_t n1, std::size_t common, u64 seed) {
  World w;
  Prg g(seed, "world");
  std::set<u64> s;
  while (s.size() < n0 + n1 - common) s.insert(g.next() >> 4);
  std::vector<u64> all(s.begin(), s.end());
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[g.uniform(i)]);
  w.ids[0].assign(all.begin(), all.begin() + n0);
  w.ids[1].assign(all.begin(), all.begin() + common);
  w.ids[1].insert(w.ids[1].end(), all.begin() + n0, all.end());
  for (int p = 0; p < 2; ++p)
    for (std::size_t r = 0; r < w.ids[p].size(); ++r) w.row[p][w.ids[p][r]] = int(r);
  HashingParams hp;
  hp.seed = seed;
  run_pair([&](Party& P) { w.A[P.id] = dual_circuit_psi(P, PsiInput{w.ids[P.id], nullptr}, hp); });
  for (int i = 0; i < 2; ++i) w.root[i] = reconstruct_bool(w.A[0][i].b, w.A[1][i].b);
  return w;
}

// Item in bucket j of instance i (held by receiver i), or kPadItem.
u64 item_at(const World& w, int i, std::size_t j) { return w.A[i][i].ch.item[j]; }

}  // namespace

TEST(Sync, OisAllOnes) {
  const std::size_t m = 32;
  BitVec ones(m, 1);
  auto [p0, p1] = share(ones, 1);
  BitMatrix dummy;
  Children out[2];
  run_pair([&](Party& P) { out[P.id] = ois(P, 0, P.id ? p1 : p0, dummy, P.id == 0 ? &ones : nullptr, -1); });
  EXPECT_EQ(reconstruct_bool(out[0].left, out[1].left), ones);
  EXPECT_EQ(reconstruct_bool(out[0].right, out[1].right), BitVec(m, 0));
}

TEST(Sync, OisEightSampleToy) {
  // Prefix matrix of 2 features with 2 bins for 8 samples.
  const std::size_t m = 8, rows = 4;
  BitVec parent{1, 1, 0, 1, 1, 0, 1, 1};
  BitMatrix Mt;
  Mt.rows = rows;
  Mt.cols = m;
  Mt.bits = {1, 0, 1, 0, 0, 1, 1, 0,  // f0 u0
             1, 1, 1, 1, 1, 1, 1, 1,  // f0 u1
             0, 0, 1, 1, 0, 1, 0, 1,  // f1 u0
             1, 1, 1, 1, 1, 1, 1, 1};
  auto [ms0, ms1] = share(Mt.bits, 2);
  BitMatrix held[2] = {Mt, Mt};
  held[0].bits = ms0;
  held[1].bits = ms1;
  auto [p0, p1] = share(parent, 3);
  for (int owner = 0; owner < 2; ++owner)
    for (int row = 0; row < int(rows); ++row) {
      BitVec bstar(Mt.bits.begin() + row * m, Mt.bits.begin() + (row + 1) * m);
      Children out[2];
      auto pr = run_pair([&](Party& P) {
        out[P.id] = ois(P, owner, P.id ? p1 : p0, held[P.id], owner == 0 && P.id == 0 ? &bstar : nullptr,
                        owner == 1 && P.id == 1 ? row : -1);
      });
      auto L = reconstruct_bool(out[0].left, out[1].left);
      auto R = reconstruct_bool(out[0].right, out[1].right);
      for (std::size_t i = 0; i < m; ++i) {
        EXPECT_EQ(L[i], parent[i] & bstar[i]);
        EXPECT_EQ(R[i], parent[i] & (bstar[i] ^ 1));
      }
      EXPECT_EQ(pr.counters[0].ot, owner == 1 ? m : 0u);
    }
}

TEST(Sync, OisSenderPathOtCount) {
  const std::size_t m = 64, rows = 16;
  Prg g(4);
  BitMatrix Mt;
  Mt.rows = rows;
  Mt.cols = m;
  for (std::size_t k = 0; k < rows * m; ++k) Mt.bits.push_back(u8(g.bit()));
  BitVec parent(m);
  for (auto& b : parent) b = u8(g.bit());
  auto [ms0, ms1] = share(Mt.bits, 5);
  auto [p0, p1] = share(parent, 6);
  BitMatrix sh[2] = {Mt, Mt};
  sh[0].bits = ms0;
  sh[1].bits = ms1;
  Children out[2];
  auto pr = run_pair([&](Party& P) { out[P.id] = ois(P, 1, P.id ? p1 : p0, sh[P.id], nullptr, P.id ? 11 : -1); });
  EXPECT_EQ(pr.counters[0].ot, 64u);
  EXPECT_EQ(pr.counters[1].ot, 64u);
  auto L = reconstruct_bool(out[0].left, out[1].left);
  for (std::size_t i = 0; i < m; ++i) EXPECT_EQ(L[i], parent[i] & Mt.at(11, i));
}

namespace {

// Random node indicators (restricted to roots) and owner assignments, checked against the per-item update.
void check_batch(const World& w, int owner, std::size_t K, u64 seed, bool batched) {
  Prg g(seed, "batch");
  const int o = 1 - owner;
  std::vector<NodeSync> plain(K);
  std::vector<std::map<u64, u8>> in_node(K), assign(K);
  for (std::size_t k = 0; k < K; ++k) {
    plain[k].pos = int(k);
    for (int p = 0; p < 2; ++p)
      for (u64 id : w.ids[p]) {
        if (!in_node[k].count(id)) in_node[k][id] = u8(g.bit());
      }
    for (u64 id : w.ids[owner]) assign[k][id] = u8(g.bit());
    for (int i = 0; i < 2; ++i) {
      plain[k].parent[i].resize(w.A[0][i].m);
      for (std::size_t j = 0; j < w.A[0][i].m; ++j) {
        u64 it = item_at(w, i, j);
        plain[k].parent[i][j] = it == kPadItem ? 0 : u8(w.root[i][j] & in_node[k].at(it));
      }
    }
    plain[k].bstar.resize(w.A[0][owner].m);
    for (std::size_t j = 0; j < w.A[0][owner].m; ++j) {
      u64 it = item_at(w, owner, j);
      plain[k].bstar[j] = it == kPadItem ? 0 : assign[k].at(it);
    }
  }
  std::vector<NodeSync> in[2];
  for (int p = 0; p < 2; ++p) in[p] = plain;
  for (std::size_t k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) {
      auto [a, b] = share(plain[k].parent[i], seed + 10 * k + i);
      in[0][k].parent[i] = a;
      in[1][k].parent[i] = b;
    }
  for (std::size_t k = 0; k < K; ++k) in[1 - owner][k].bstar.clear();
  std::vector<NodeChildren> out[2];
  auto pr = run_pair([&](Party& P) {
    if (batched) {
      out[P.id] = bois(P, owner, w.A[P.id], in[P.id]);
    } else {
      for (std::size_t k = 0; k < K; ++k) out[P.id].push_back(oois(P, owner, w.A[P.id], in[P.id][k]));
    }
  });
  EXPECT_EQ(pr.counters[o].opprf_calls, batched ? 1u : K);
  for (std::size_t k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) {
      auto L = reconstruct_bool(out[0][k].inst[i].left, out[1][k].inst[i].left);
      auto R = reconstruct_bool(out[0][k].inst[i].right, out[1][k].inst[i].right);
      const auto& par = plain[k].parent[i];
      for (std::size_t j = 0; j < par.size(); ++j) {
        u64 it = item_at(w, i, j);
        u8 want = par[j] ? assign[k].at(it) : 0;
        ASSERT_EQ(L[j], want) << "node " << k << " instance " << i << " bucket " << j;
        ASSERT_EQ(L[j] | R[j], par[j]);
        ASSERT_EQ(L[j] & R[j], 0);
      }
    }
}

}  // namespace

TEST(Sync, OoisFullOverlap) {
  World w = make_world(64, 64, 64, 11);
  check_batch(w, 0, 1, 1, false);
  check_batch(w, 1, 1, 2, false);
}

TEST(Sync, OoisAllZeroAssignment) {
  World w = make_world(40, 50, 30, 12);
  std::array<NodeSync, 2> nd;
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 2; ++i) nd[p].parent[i] = w.A[p][i].b;
  nd[1].bstar.assign(w.A[1][1].m, 0);
  NodeChildren out[2];
  run_pair([&](Party& P) { out[P.id] = oois(P, 1, w.A[P.id], nd[P.id]); });
  for (int i = 0; i < 2; ++i) {
    auto L = reconstruct_bool(out[0].inst[i].left, out[1].inst[i].left);
    auto R = reconstruct_bool(out[0].inst[i].right, out[1].inst[i].right);
    EXPECT_EQ(std::count(L.begin(), L.end(), 1), 0);
    EXPECT_EQ(R, w.root[i]);
  }
}

TEST(Sync, OoisPartialOverlapKeepsZeros) {
  World w = make_world(100, 100, 55, 13);
  check_batch(w, 0, 1, 3, false);
  check_batch(w, 1, 1, 4, false);
}

TEST(Sync, BoisMatchesPerNode) {
  World w = make_world(120, 90, 70, 14);
  for (int owner = 0; owner < 2; ++owner) {
    check_batch(w, owner, 4, 20 + owner, true);
    check_batch(w, owner, 4, 20 + owner, false);
  }
  check_batch(w, 1, 1, 30, true);
}

TEST(Sync, BoisRejectsWideBatch) {
  World w = make_world(10, 10, 5, 15);
  std::vector<NodeSync> nd(1);
  nd[0].pos = 64;
  EXPECT_THROW(run_pair([&](Party& P) { bois(P, 0, w.A[P.id], nd); }), std::invalid_argument);
}
