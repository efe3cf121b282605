// Copyright 2026  The PLF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "plf/phonology.h"

namespace plf {
namespace {

const char* kSmallSpec = R"({
  "plfs": ["A", "B", "F", "K"],
  "groups": {"pos": ["F", "K"]},
  "phones": ["x", "y", "z"],
  "matrix": [[1, -1, 0, 0], [0, 1, 0.5, 0.5], [-1, 0, 1, 0]]
})";

std::string WithMatrix(const std::string& matrix) {
  return R"({"plfs": ["A", "B", "F", "K"], "groups": {"pos": ["F", "K"]},
             "phones": ["x", "y", "z"], "matrix": )" + matrix + "}";
}

ErrorKind KindOf(const std::string& text) {
  try {
    ParseSpec(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "spec was accepted";
  return ErrorKind::kIo;
}

TEST(SpecTest, DemoSpecShape) {
  const ConversionSpec spec = DemoSpec();
  EXPECT_EQ(spec.num_phones(), 10);
  EXPECT_EQ(spec.num_plfs(), 8);
  EXPECT_EQ(spec.inventory().groups.size(), 2u);
}

TEST(SpecTest, TemplateHasCanonicalInventory) {
  const ConversionSpec spec = CanonicalTemplateSpec();
  EXPECT_EQ(spec.num_plfs(), 21);
  EXPECT_EQ(spec.inventory().names, CanonicalPlfNames());
}

TEST(SpecTest, ParsesGroupsAndLookups) {
  const ConversionSpec spec = ParseSpec(kSmallSpec);
  EXPECT_EQ(spec.PlfIndex("F"), 2);
  EXPECT_EQ(spec.PlfIndex("nope"), -1);
  EXPECT_EQ(spec.PhoneIndex("z"), 2);
  EXPECT_EQ(spec.group_of(0), -1);
  EXPECT_EQ(spec.group_of(3), 0);
  EXPECT_TRUE(spec.group_active(1, 0));
  EXPECT_TRUE(spec.group_active(2, 0));
  EXPECT_FALSE(spec.group_active(0, 0));
}

TEST(SpecTest, OutOfRangeEntryNamesItsCoordinates) {
  try {
    ParseSpec(WithMatrix("[[1, -1, 0, 0], [0, 1.5, 0.5, 0.5], [-1, 0, 1, 0]]"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    const std::string what = e.what();
    EXPECT_NE(what.find("y"), std::string::npos) << what;
    EXPECT_NE(what.find("B"), std::string::npos) << what;
  }
}

TEST(SpecTest, EmptyRowRejected) {
  try {
    ParseSpec(WithMatrix("[[1, -1, 0, 0], [0, 0, 0, 0], [-1, 0, 1, 0]]"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
  }
}

TEST(SpecTest, StructuralErrors) {
  // Fractional value outside a group.
  EXPECT_EQ(KindOf(WithMatrix("[[0.5, -1, 0, 0], [0, 1, 0.5, 0.5], [-1, 0, 1, 0]]")),
            ErrorKind::kValidation);
  // Negative value inside a group.
  EXPECT_EQ(KindOf(WithMatrix("[[1, -1, -1, 0], [0, 1, 0.5, 0.5], [-1, 0, 1, 0]]")),
            ErrorKind::kValidation);
  // Row length mismatch.
  EXPECT_EQ(KindOf(WithMatrix("[[1, -1, 0], [0, 1, 0.5, 0.5], [-1, 0, 1, 0]]")),
            ErrorKind::kValidation);
  // Duplicate phone.
  EXPECT_EQ(KindOf(R"({"plfs": ["A"], "phones": ["x", "x"], "matrix": [[1], [-1]]})"),
            ErrorKind::kValidation);
  // Group member not in the inventory.
  EXPECT_EQ(KindOf(R"({"plfs": ["A"], "groups": {"g": ["Q"]}, "phones": ["x"], "matrix": [[1]]})"),
            ErrorKind::kValidation);
  // Not JSON at all.
  EXPECT_EQ(KindOf("{plfs"), ErrorKind::kFormat);
}

TEST(SpecTest, WriteLoadRoundTrip) {
  const ConversionSpec spec = ParseSpec(kSmallSpec);
  const auto path = std::filesystem::temp_directory_path() / "plf_spec_roundtrip.json";
  WriteSpec(path, spec);
  const ConversionSpec back = LoadSpec(path);
  EXPECT_TRUE(back == spec);
  EXPECT_EQ(SpecHash(back), SpecHash(spec));
  std::filesystem::remove(path);
  const ConversionSpec demo = DemoSpec();
  EXPECT_TRUE(ParseSpec(SpecToJson(demo)) == demo);
}

TEST(SpecTest, HashSeesMatrixChanges) {
  const ConversionSpec a = ParseSpec(kSmallSpec);
  const ConversionSpec b = ParseSpec(WithMatrix("[[1, -1, 0, 0], [0, 1, 0.5, 0.5], [-1, 1, 1, 0]]"));
  EXPECT_NE(SpecHash(a), SpecHash(b));
}

TEST(EffectiveMatrixTest, Examples) {
  const ConversionSpec spec = ParseSpec(kSmallSpec);
  const Matrix& m = spec.M();
  EXPECT_EQ(EffectiveMatrix(spec.matrix(), ScalingMatrix::Identity(3, 4)), m);

  ScalingMatrix s = ScalingMatrix::Identity(3, 4);
  s.raw.setConstant(3.7);
  const Matrix e = EffectiveMatrix(spec.matrix(), s);
  EXPECT_EQ(e(1, 0), 0.0);

  s.raw(0, 1) = std::log(2.0);
  EXPECT_DOUBLE_EQ(EffectiveMatrix(spec.matrix(), s)(0, 1), -2.0);

  EXPECT_THROW(EffectiveMatrix(spec.matrix(), ScalingMatrix::Identity(2, 4)), Error);
}

TEST(EffectiveMatrixTest, SignPatternPreserved) {
  const ConversionSpec spec = DemoSpec();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    ScalingMatrix s = ScalingMatrix::Identity(spec.num_phones(), spec.num_plfs());
    for (Eigen::Index i = 0; i < s.raw.size(); ++i) s.raw.data()[i] = n(rng);
    const Matrix e = EffectiveMatrix(spec.matrix(), s);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double a = e.data()[i], b = spec.M().data()[i];
      EXPECT_EQ((a > 0) - (a < 0), (b > 0) - (b < 0));
    }
  }
}

}  // namespace
}  // namespace plf
