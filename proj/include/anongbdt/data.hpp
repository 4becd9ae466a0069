#pragma once
#include <stdexcept>
#include <string>
#include <vector>

#include "anongbdt/bits.hpp"

namespace ag {

struct Dataset {
  std::vector<u64> ids;
  std::size_t m = 0;
  std::vector<double> X;  // row-major, n x m
  std::vector<int> y;     // empty when the party holds no labels
  std::vector<std::string> names;

  std::size_t n() const { return ids.size(); }
  double x(std::size_t i, std::size_t f) const { return X[i * m + f]; }
  bool labeled() const { return !y.empty(); }
  // Throws std::invalid_argument on shape errors, duplicate or reserved ids, or non-binary labels.
  void validate() const;
  Dataset rows(const std::vector<std::size_t>& idx) const;
};

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Header row required. The first column is the id; a column named "label" or "y" holds binary labels.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& d, const std::string& path);

struct SyntheticPair {
  Dataset d0, d1;             // d0 carries the labels
  std::vector<double> rule;   // label = 1{ rule . (x0 || x1) > 0 } before flipping
  std::size_t common = 0;
};
// |intersection| = round(overlap * min(n0, n1)). A fraction `noise` of labels is flipped.
SyntheticPair gen_synthetic(std::size_t n0, std::size_t n1, std::size_t m0, std::size_t m1, double overlap, u64 seed,
                            double noise = 0.05);

// F1 of thresholded predictions; 0 when there is no positive label or prediction.
double f1_score(const std::vector<double>& p, const std::vector<int>& y, double threshold = 0.5);
// Fold assignment of n rows into k shuffled folds.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, int k, u64 seed);

}  // namespace ag
