#include <gtest/gtest.h>

#include "normreg/core/dataset.hpp"

using namespace normreg;

TEST(Dataset, InfersKinds) {
  Matrix x(3, 2);
  x << 0, 0.5, 1, 2, 1, 3;
  Dataset d(x, Vector::Ones(3));
  EXPECT_EQ(d.kind(0), FeatureKind::Binary);
  EXPECT_EQ(d.kind(1), FeatureKind::Continuous);
  EXPECT_EQ(d.name(1), "x2");
}

TEST(Dataset, RejectsShapeMismatch) {
  EXPECT_THROW(Dataset(Matrix::Zero(3, 1), Vector::Zero(2)), DimensionError);
  EXPECT_THROW(Dataset(Matrix::Zero(3, 1), Vector::Zero(3), {FeatureKind::Binary, FeatureKind::Binary}),
               DimensionError);
}

TEST(Dataset, RejectsNonBinaryTaggedBinary) {
  Matrix x(2, 1);
  x << 0, 2;
  EXPECT_THROW(Dataset(x, Vector::Zero(2), {FeatureKind::Binary}), DomainError);
  EXPECT_NO_THROW(Dataset::transformed(x, Vector::Zero(2), {FeatureKind::Binary}, {}));
}

TEST(Dataset, SelectRowsAndView) {
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  Vector y(4);
  y << 1, 2, 3, 4;
  Dataset d(x, y);
  std::vector<Index> rows{3, 1};
  Dataset s = d.select_rows(rows);
  EXPECT_EQ(s.rows(), 2);
  EXPECT_EQ(s(0, 1), 8);
  EXPECT_EQ(s.y()(1), 2);
  RowView v(d, rows);
  EXPECT_EQ(v(1, 0), 3);
  EXPECT_EQ(v.rows(), 2);
}
