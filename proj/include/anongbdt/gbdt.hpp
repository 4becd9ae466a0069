#pragma once
#include <string>
#include <vector>

#include "anongbdt/data.hpp"
#include "anongbdt/he_proto.hpp"
#include "anongbdt/psi.hpp"

namespace ag {

struct TrainConfig {
  int T = 1;
  int D = 3;
  int B = 8;
  double alpha = 0.001;
  double gamma = 0.0;
  double shrinkage = 1.0;
  void validate() const;
};

// Per-feature quantile edges: bin(x) = #{t : x > edge[t]}, B - 1 edges per feature.
struct Binning {
  int B = 0;
  std::vector<std::vector<double>> edges;
  int bin(std::size_t f, double x) const;
  // Largest value that lands in bins <= u (infinity for the last bin).
  double threshold(std::size_t f, int u) const;
};
Binning fit_bins(const Dataset& d, int B);
// bins[f][i] for every row.
std::vector<std::vector<int>> bin_columns(const Dataset& d, const Binning& b);
// One-hot matrix M (mB x n) and prefix matrix M~ with M~[zB+u] = OR_{v<=u} M[zB+v].
std::pair<BitMatrix, BitMatrix> bin_matrices(const std::vector<std::vector<int>>& bins, int B);

// ---- plaintext reference ----

struct PlainTree {
  std::vector<int> feature;  // index k in [1, 2^(D-1)); global feature (party 0 first), -1 at index 0
  std::vector<int> bin;
  std::vector<double> leaf;  // index k - 2^(D-1)
};
struct PlainModel {
  TrainConfig cfg;
  std::vector<PlainTree> trees;
};
// Joint table of the common samples: features of both parties side by side, bins precomputed.
struct JointData {
  std::size_t n = 0, m = 0;
  int B = 0;
  std::vector<std::vector<int>> bins;  // [feature][sample]
  std::vector<int> y;
};
JointData join_common(const Dataset& d0, const Dataset& d1, const Binning& b0, const Binning& b1);
// Trains with the clipped Fourier sigmoid; gradient statistics are rounded to the fixed-point grid.
PlainModel train_plain(const JointData& J, const TrainConfig& cfg);
std::vector<double> predict_plain(const PlainModel& M, const JointData& J);
// Split gain without the parent term, 1/2 and gamma (none of which changes the argmax).
double split_score(double GL, double HL, double GR, double HR, double alpha);

// ---- secure training ----

struct NodeSplit {
  int owner = -1;     // public
  int feature = -1;   // local feature index, only at the owner
  int bin = -1;
  double threshold = 0;
};
struct PartyTree {
  std::vector<NodeSplit> nodes;  // index k in [1, 2^(D-1))
  Shares leaf;                   // shares of the leaf weights, index k - 2^(D-1)
};
struct PartyModel {
  int party = 0;
  TrainConfig cfg;
  std::size_t m_local = 0, m_peer = 0;
  std::vector<PartyTree> trees;
  Bytes serialize() const;
  static PartyModel deserialize(const Bytes& b);
  std::string hash_hex() const;
};

enum class Protocol { Base, Otsa };
struct TrainOptions {
  Protocol protocol = Protocol::Otsa;
  HashingParams hp;
  const HeContext* he = nullptr;  // required for the OTSA pipeline
  SigmoidParams sigmoid = SigmoidParams::ours();
  bool owner_skip = true;         // reuse the owner's encrypted gradients for child histograms
};
// Both parties call this with their own dataset; party 0's dataset carries the labels.
PartyModel train(Party& P, const Dataset& mine, const TrainConfig& cfg, const TrainOptions& opt);

// Probabilities for party 0's rows (0.5 for rows without a match); empty at party 1.
std::vector<double> infer(Party& P, const Dataset& mine, const PartyModel& model, const HashingParams& hp,
                          const SigmoidParams& sp = SigmoidParams::ours());

}  // namespace ag
