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

#ifndef PLF_PHONOLOGY_H_
#define PLF_PHONOLOGY_H_

#include <filesystem>
#include <string>
#include <vector>

#include "plf/common.h"

namespace plf {

/// A set of PLFs whose posteriors are combined as a weighted sum (vowel
/// position). Member weights are the phone's matrix entries in those columns.
struct PlfGroup {
  std::string name;
  std::vector<int> members;  // PLF column indices
};

struct PlfInventory {
  std::vector<std::string> names;
  std::vector<PlfGroup> groups;
};

/// The 21 phonological features of the canonical inventory, in template order.
const std::vector<std::string>& CanonicalPlfNames();

/// P x F expected PLF responses in [-1, 1]; 0 means irrelevant.
struct ConversionMatrix {
  Matrix values;
};

/// Learnable positive scaling; effective entries are exp(raw).
struct ScalingMatrix {
  Matrix raw;
  static ScalingMatrix Identity(Eigen::Index phones, Eigen::Index plfs) {
    return {Matrix::Zero(phones, plfs)};
  }
};

class ConversionSpec {
 public:
  ConversionSpec() = default;
  /// Validates on construction; throws Error(kValidation/kDimension).
  ConversionSpec(PlfInventory inventory, std::vector<std::string> phones, ConversionMatrix matrix);

  const PlfInventory& inventory() const { return inventory_; }
  const std::vector<std::string>& phones() const { return phones_; }
  const ConversionMatrix& matrix() const { return matrix_; }
  const Matrix& M() const { return matrix_.values; }

  int num_phones() const { return static_cast<int>(phones_.size()); }
  int num_plfs() const { return static_cast<int>(inventory_.names.size()); }

  /// Column -> group index, or -1 for independent PLFs.
  int group_of(int plf) const { return group_of_[plf]; }
  /// True when phone p has a nonzero weight on some member of group g.
  bool group_active(int phone, int group) const;

  int PlfIndex(std::string_view name) const;      // -1 if absent
  int PhoneIndex(std::string_view symbol) const;  // -1 if absent

  bool operator==(const ConversionSpec& o) const {
    return inventory_.names == o.inventory_.names && phones_ == o.phones_ &&
           matrix_.values == o.matrix_.values && GroupsEqual(o);
  }

 private:
  bool GroupsEqual(const ConversionSpec& o) const;
  void Validate();

  PlfInventory inventory_;
  std::vector<std::string> phones_;
  ConversionMatrix matrix_;
  std::vector<int> group_of_;
};

ConversionSpec ParseSpec(std::string_view json_text);
ConversionSpec LoadSpec(const std::filesystem::path& path);
std::string SpecToJson(const ConversionSpec& spec);
void WriteSpec(const std::filesystem::path& path, const ConversionSpec& spec);
/// Header row = PLF names, first column = phone symbols.
void ExportSpecCsv(const std::filesystem::path& path, const ConversionSpec& spec);
/// SHA-256 of the canonical JSON encoding.
std::string SpecHash(const ConversionSpec& spec);

/// Entrywise M * exp(raw). Sign pattern equals M's.
Matrix EffectiveMatrix(const ConversionMatrix& m, const ScalingMatrix& s);

/// Shipped specs (10 phones x 8 PLFs demo, 21-PLF template).
std::filesystem::path DataDir();
ConversionSpec DemoSpec();
ConversionSpec CanonicalTemplateSpec();

}  // namespace plf

#endif  // PLF_PHONOLOGY_H_
