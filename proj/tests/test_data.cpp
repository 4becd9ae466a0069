#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "anongbdt/data.hpp"

using namespace ag;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(DataCsv, LoadsFeaturesAndLabels) {
  auto path = write_tmp("toy.csv", "id,age,weight,label\n1,25,65,0\n2,35,75,1\n\n3,45,85,1\n4,28,68,0\n");
  Dataset d = load_csv(path);
  EXPECT_EQ(d.n(), 4u);
  EXPECT_EQ(d.m, 2u);
  EXPECT_EQ(d.names, (std::vector<std::string>{"age", "weight"}));
  EXPECT_EQ(d.x(2, 1), 85);
  EXPECT_EQ(d.y, (std::vector<int>{0, 1, 1, 0}));

  auto again = write_tmp("toy2.csv", "");
  save_csv(d, again);
  Dataset e = load_csv(again);
  EXPECT_EQ(e.ids, d.ids);
  EXPECT_EQ(e.X, d.X);
  EXPECT_EQ(e.y, d.y);
}

TEST(DataCsv, UnlabeledParty) {
  Dataset d = load_csv(write_tmp("p1.csv", "id,height\n7,1.5\n9,1.75\n"));
  EXPECT_FALSE(d.labeled());
  EXPECT_EQ(d.ids, (std::vector<u64>{7, 9}));
}

TEST(DataCsv, RejectsBadInput) {
  EXPECT_THROW(load_csv(write_tmp("dup.csv", "id,a\n1,2\n1,3\n")), CsvError);
  EXPECT_THROW(load_csv(write_tmp("short.csv", "id,a,label\n1,2\n")), CsvError);
  EXPECT_THROW(load_csv(write_tmp("nan.csv", "id,a\n1,abc\n")), CsvError);
  EXPECT_THROW(load_csv(write_tmp("lab.csv", "id,a,label\n1,2,3\n")), CsvError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), CsvError);
  try {
    load_csv(write_tmp("line.csv", "id,a\n1,2\n2,x\n"));
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
}

TEST(DataSynthetic, OverlapExtremes) {
  auto none = gen_synthetic(50, 60, 2, 3, 0.0, 1);
  std::set<u64> a(none.d0.ids.begin(), none.d0.ids.end());
  for (u64 id : none.d1.ids) EXPECT_EQ(a.count(id), 0u);

  auto full = gen_synthetic(50, 50, 2, 3, 1.0, 2);
  EXPECT_EQ(std::set<u64>(full.d0.ids.begin(), full.d0.ids.end()),
            std::set<u64>(full.d1.ids.begin(), full.d1.ids.end()));
  EXPECT_EQ(full.d0.m, 2u);
  EXPECT_EQ(full.d1.m, 3u);
  EXPECT_TRUE(full.d0.labeled());
  EXPECT_FALSE(full.d1.labeled());
}

TEST(DataSynthetic, UnbalancedSizes) {
  auto sp = gen_synthetic(300, 40, 1, 1, 0.5, 3);
  EXPECT_EQ(sp.d0.n(), 300u);
  EXPECT_EQ(sp.d1.n(), 40u);
  EXPECT_EQ(sp.common, 20u);
  std::set<u64> a(sp.d0.ids.begin(), sp.d0.ids.end());
  std::size_t c = 0;
  for (u64 id : sp.d1.ids) c += a.count(id);
  EXPECT_EQ(c, 20u);
  sp.d0.validate();
  sp.d1.validate();
}

TEST(DataSynthetic, Deterministic) {
  auto a = gen_synthetic(30, 30, 2, 2, 0.5, 9), b = gen_synthetic(30, 30, 2, 2, 0.5, 9);
  EXPECT_EQ(a.d0.ids, b.d0.ids);
  EXPECT_EQ(a.d1.X, b.d1.X);
}

TEST(DataMetrics, F1) {
  EXPECT_DOUBLE_EQ(f1_score({0.9, 0.1, 0.8}, {1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(f1_score({0.1, 0.9}, {1, 0}), 0.0);
  // tp = 1, fp = 1, fn = 0
  EXPECT_DOUBLE_EQ(f1_score({0.9, 0.7, 0.2}, {1, 0, 0}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f1_score({0.1}, {0}), 0.0);
  EXPECT_THROW(f1_score({0.1}, {0, 1}), std::invalid_argument);
}

TEST(DataMetrics, FoldsPartitionRows) {
  auto folds = kfold(23, 5, 4);
  std::set<std::size_t> all;
  for (const auto& f : folds) {
    EXPECT_GE(f.size(), 4u);
    all.insert(f.begin(), f.end());
  }
  EXPECT_EQ(all.size(), 23u);
}
