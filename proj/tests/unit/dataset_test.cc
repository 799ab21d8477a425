#include "relcomp/dataset.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <set>

namespace relcomp {
namespace {

TEST(ParseCsv, ShapeAndLabelEncoding) {
  Dataset d = ParseCsv("x,y,class\n1,2,b\n3,4,a\n5,6,b\n7,8,a\n", {.label_column = "class"});
  EXPECT_EQ(d.size(), 4);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.num_classes, 2);
  // Sorted raw labels: a -> 0, b -> 1.
  ASSERT_TRUE(d.has_labels());
  EXPECT_EQ(*d.labels, (std::vector<int>{1, 0, 1, 0}));
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d.ids, (std::vector<std::string>{"0", "1", "2", "3"}));
}

TEST(ParseCsv, IdColumnIsNotAFeature) {
  Dataset d = ParseCsv("id,x\nr1,1\nr2,2\nr3,3\n");
  EXPECT_EQ(d.dim(), 1);
  EXPECT_EQ(d.ids[2], "r3");
  EXPECT_FALSE(d.has_labels());
}

TEST(ParseCsv, RejectsNonFinite) {
  try {
    ParseCsv("x,y\n1,2\nnan,4\n5,6\n");
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite feature"), std::string::npos) << e.what();
  }
}

TEST(ParseCsv, RejectsMalformedInput) {
  EXPECT_THROW(ParseCsv("x,y\n1,2\n3\n5,6\n"), DatasetError);
  EXPECT_THROW(ParseCsv("x\n1\n2\nabc\n"), DatasetError);
  EXPECT_THROW(ParseCsv("x,class\n1,a\n2,b\n3,a\n", {.label_column = "label"}), DatasetError);
  EXPECT_THROW(ParseCsv("id,x\na,1\na,2\nb,3\n"), DatasetError);
  EXPECT_THROW(ParseCsv("x\n1\n2\n"), DatasetError);
}

TEST(LoadCsv, WineShape) {
  Dataset d = LoadCsv(std::filesystem::path(RELCOMP_DATA_DIR) / "wine.csv",
                      {.label_column = "class"});
  EXPECT_EQ(d.size(), 178);
  EXPECT_EQ(d.dim(), 13);
  EXPECT_EQ(d.num_classes, 3);
}

TEST(WriteCsv, RoundTrip) {
  Dataset d = MakeSyntheticGaussians({.num_classes = 2, .per_class = 5, .dim = 3, .seed = 4});
  auto path = std::filesystem::temp_directory_path() / "relcomp_dataset_roundtrip.csv";
  WriteCsv(d, path);
  Dataset back = LoadCsv(path, {.label_column = "class"});
  std::filesystem::remove(path);
  EXPECT_EQ(back.features, d.features);  // written with round-trip precision
  EXPECT_EQ(back.ids, d.ids);
  EXPECT_EQ(*back.labels, *d.labels);
}

TEST(Synthetic, Shape) {
  Dataset d = MakeSyntheticGaussians({3, 40, 6, 2, 4.0, 7});
  EXPECT_EQ(d.size(), 120);
  EXPECT_EQ(d.dim(), 6);
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_NO_THROW(d.Validate());
}

TEST(Synthetic, Deterministic) {
  Dataset a = MakeSyntheticGaussians({3, 40, 6, 2, 4.0, 7});
  Dataset b = MakeSyntheticGaussians({3, 40, 6, 2, 4.0, 7});
  EXPECT_EQ(a.features, b.features);
  Dataset c = MakeSyntheticGaussians({3, 40, 6, 2, 4.0, 8});
  EXPECT_NE(a.features, c.features);
}

TEST(Synthetic, FarApartBlobsAreOneNnSeparable) {
  Dataset d = MakeSyntheticGaussians({2, 10, 2, 2, 100.0, 1});
  // Leave-one-out 1NN with plain loops.
  int correct = 0;
  for (int h = 0; h < d.size(); ++h) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int g = 0; g < d.size(); ++g) {
      if (g == h) continue;
      double s = 0;
      for (int f = 0; f < d.dim(); ++f) {
        double diff = d.features(h, f) - d.features(g, f);
        s += diff * diff;
      }
      if (s < best_d) best_d = s, best = g;
    }
    correct += (*d.labels)[best] == (*d.labels)[h];
  }
  EXPECT_EQ(correct, d.size());
}

TEST(Split, SizesAndPartition) {
  Dataset d = MakeSyntheticGaussians({2, 5, 2, 1, 3.0, 2});
  Split s = SplitDataset(d, 0.5, 9);
  EXPECT_EQ(s.train_indices.size(), 5u);
  EXPECT_EQ(s.test_indices.size(), 5u);
  std::set<int> all(s.train_indices.begin(), s.train_indices.end());
  for (int t : s.test_indices) EXPECT_TRUE(all.insert(t).second);
  EXPECT_EQ(all.size(), 10u);
}

TEST(Split, Stratified) {
  Dataset d = MakeSyntheticGaussians({2, 5, 2, 1, 3.0, 2});
  Split s = SplitDataset(d, 0.4, 3);
  int ones = 0;
  for (int t : s.test_indices) ones += (*d.labels)[t];
  EXPECT_EQ(s.test_indices.size(), 4u);
  EXPECT_EQ(ones, 2);
}

TEST(Split, Deterministic) {
  Dataset d = MakeSyntheticGaussians({3, 10, 2, 1, 3.0, 2});
  Split a = SplitDataset(d, 0.3, 5);
  Split b = SplitDataset(d, 0.3, 5);
  EXPECT_EQ(a.train_indices, b.train_indices);
  EXPECT_EQ(a.test_indices, b.test_indices);
}

TEST(Standardizer, FitsTrainingFoldOnly) {
  FeatureMatrix train(3, 2);
  train << 1, 5, 2, 5, 3, 5;
  Standardizer s = Standardizer::Fit(train);
  FeatureMatrix z = s.Apply(train);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(z.col(0).squaredNorm() / 3.0, 1.0, 1e-12);
  // Constant column keeps unit scale.
  EXPECT_DOUBLE_EQ(s.scale()[1], 1.0);
  FeatureMatrix other(1, 2);
  other << 4, 7;
  FeatureMatrix zo = s.Apply(other);
  EXPECT_NEAR(zo(0, 0), (4.0 - 2.0) / s.scale()[0], 1e-12);
  EXPECT_DOUBLE_EQ(zo(0, 1), 2.0);
}

TEST(PrepareData, NoSplitKeepsEverything) {
  Dataset d = MakeSyntheticGaussians({2, 6, 3, 1, 3.0, 2});
  PreparedData p = PrepareData(d, 0.0, 1, false);
  EXPECT_EQ(p.train.size(), 12);
  EXPECT_EQ(p.test.size(), 0);
  EXPECT_EQ(p.train.features, d.features);
}

TEST(Fingerprint, ChangesWithFeatures) {
  Dataset d = MakeSyntheticGaussians({2, 6, 3, 1, 3.0, 2});
  auto a = FeatureFingerprint(d.features);
  EXPECT_EQ(a, FeatureFingerprint(d.features));
  d.features(3, 1) += 1e-9;
  EXPECT_NE(a, FeatureFingerprint(d.features));
}

}  // namespace
}  // namespace relcomp
