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

#include "plf/phonology.h"

#include <cmath>
#include <cstdlib>
#include <set>

#include "json.hpp"

namespace plf {

using json = nlohmann::ordered_json;

const std::vector<std::string>& CanonicalPlfNames() {
  static const std::vector<std::string> names = {
      "Coronal", "Alveolar",  "Speech",   "Turbulent", "Mid",     "Back",    "Low",
      "Central", "Vowel",     "High",     "Dorsal",    "Nasal",   "Labial",  "Plosive",
      "Diphthong", "Sonorant", "Rounded", "Voiced",    "Lateral", "Frontal", "Fricative"};
  return names;
}

namespace {

std::string Where(const std::vector<std::string>& phones, const std::vector<std::string>& plfs,
                  Eigen::Index p, Eigen::Index f) {
  return "phone '" + phones[p] + "' (row " + std::to_string(p) + "), PLF '" + plfs[f] +
         "' (column " + std::to_string(f) + ")";
}

}  // namespace

ConversionSpec::ConversionSpec(PlfInventory inventory, std::vector<std::string> phones,
                               ConversionMatrix matrix)
    : inventory_(std::move(inventory)), phones_(std::move(phones)), matrix_(std::move(matrix)) {
  Validate();
}

void ConversionSpec::Validate() {
  const auto& names = inventory_.names;
  if (names.empty()) throw Error(ErrorKind::kValidation, "empty PLF inventory");
  if (phones_.empty()) throw Error(ErrorKind::kValidation, "empty phone inventory");
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
    throw Error(ErrorKind::kValidation, "duplicate PLF name");
  {
    std::set<std::string> seen;
    for (const auto& p : phones_)
      if (!seen.insert(p).second) throw Error(ErrorKind::kValidation, "duplicate phone symbol '" + p + "'");
  }
  const Matrix& m = matrix_.values;
  if (m.rows() != num_phones() || m.cols() != num_plfs())
    throw Error(ErrorKind::kValidation, "matrix is " + std::to_string(m.rows()) + "x" +
                                           std::to_string(m.cols()) + ", expected " +
                                           std::to_string(num_phones()) + "x" +
                                           std::to_string(num_plfs()));
  group_of_.assign(names.size(), -1);
  for (size_t g = 0; g < inventory_.groups.size(); ++g) {
    const auto& grp = inventory_.groups[g];
    if (grp.members.empty()) throw Error(ErrorKind::kValidation, "group '" + grp.name + "' is empty");
    for (int f : grp.members) {
      if (f < 0 || f >= num_plfs())
        throw Error(ErrorKind::kValidation, "group '" + grp.name + "' references unknown PLF");
      if (group_of_[f] != -1)
        throw Error(ErrorKind::kValidation, "PLF '" + names[f] + "' belongs to two groups");
      group_of_[f] = static_cast<int>(g);
    }
  }
  for (Eigen::Index p = 0; p < m.rows(); ++p) {
    bool any = false;
    for (Eigen::Index f = 0; f < m.cols(); ++f) {
      const double v = m(p, f);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0)
        throw Error(ErrorKind::kValidation,
                    "entry " + FormatDouble(v) + " out of range [-1,1] at " + Where(phones_, names, p, f));
      if (group_of_[f] == -1) {
        if (v != -1.0 && v != 0.0 && v != 1.0)
          throw Error(ErrorKind::kValidation, "fractional entry " + FormatDouble(v) +
                                                  " outside a grouped column at " +
                                                  Where(phones_, names, p, f));
      } else if (v < 0.0) {
        throw Error(ErrorKind::kValidation,
                    "negative group weight at " + Where(phones_, names, p, f));
      }
      any = any || v != 0.0;
    }
    if (!any)
      throw Error(ErrorKind::kValidation,
                  "phone '" + phones_[p] + "' (row " + std::to_string(p) + ") has an empty row");
  }
}

bool ConversionSpec::GroupsEqual(const ConversionSpec& o) const {
  const auto& a = inventory_.groups;
  const auto& b = o.inventory_.groups;
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || a[i].members != b[i].members) return false;
  return true;
}

bool ConversionSpec::group_active(int phone, int group) const {
  for (int f : inventory_.groups[group].members)
    if (matrix_.values(phone, f) != 0.0) return true;
  return false;
}

int ConversionSpec::PlfIndex(std::string_view name) const {
  for (size_t i = 0; i < inventory_.names.size(); ++i)
    if (inventory_.names[i] == name) return static_cast<int>(i);
  return -1;
}

int ConversionSpec::PhoneIndex(std::string_view symbol) const {
  for (size_t i = 0; i < phones_.size(); ++i)
    if (phones_[i] == symbol) return static_cast<int>(i);
  return -1;
}

ConversionSpec ParseSpec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("spec is not valid JSON: ") + e.what());
  }
  try {
    PlfInventory inv;
    inv.names = doc.at("plfs").get<std::vector<std::string>>();
    auto index_of = [&inv](const std::string& n) {
      for (size_t i = 0; i < inv.names.size(); ++i)
        if (inv.names[i] == n) return static_cast<int>(i);
      throw Error(ErrorKind::kValidation, "group member '" + n + "' is not a PLF");
    };
    if (doc.contains("groups")) {
      for (const auto& [name, members] : doc.at("groups").items()) {
        PlfGroup g{name, {}};
        for (const auto& m : members) g.members.push_back(index_of(m.get<std::string>()));
        inv.groups.push_back(std::move(g));
      }
    }
    auto phones = doc.at("phones").get<std::vector<std::string>>();
    const auto& rows = doc.at("matrix");
    if (!rows.is_array() || rows.size() != phones.size())
      throw Error(ErrorKind::kValidation, "matrix has " + std::to_string(rows.size()) +
                                             " rows for " + std::to_string(phones.size()) + " phones");
    ConversionMatrix m{Matrix(static_cast<Eigen::Index>(phones.size()),
                              static_cast<Eigen::Index>(inv.names.size()))};
    for (size_t p = 0; p < rows.size(); ++p) {
      if (rows[p].size() != inv.names.size())
        throw Error(ErrorKind::kValidation, "matrix row " + std::to_string(p) + " ('" + phones[p] +
                                               "') has " + std::to_string(rows[p].size()) +
                                               " entries, expected " + std::to_string(inv.names.size()));
      for (size_t f = 0; f < rows[p].size(); ++f) m.values(p, f) = rows[p][f].get<double>();
    }
    return ConversionSpec(std::move(inv), std::move(phones), std::move(m));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed spec: ") + e.what());
  }
}

ConversionSpec LoadSpec(const std::filesystem::path& path) { return ParseSpec(ReadFile(path)); }

std::string SpecToJson(const ConversionSpec& spec) {
  // nlohmann::ordered_json keeps group order stable (json sorts keys).
  nlohmann::ordered_json doc;
  doc["plfs"] = spec.inventory().names;
  doc["groups"] = nlohmann::ordered_json::object();
  for (const auto& g : spec.inventory().groups) {
    std::vector<std::string> names;
    for (int f : g.members) names.push_back(spec.inventory().names[f]);
    doc["groups"][g.name] = names;
  }
  doc["phones"] = spec.phones();
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index p = 0; p < spec.M().rows(); ++p) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index f = 0; f < spec.M().cols(); ++f) row.push_back(spec.M()(p, f));
    rows.push_back(row);
  }
  doc["matrix"] = rows;
  return doc.dump(1);
}

void WriteSpec(const std::filesystem::path& path, const ConversionSpec& spec) {
  WriteFile(path, SpecToJson(spec) + "\n");
}

void ExportSpecCsv(const std::filesystem::path& path, const ConversionSpec& spec) {
  CsvTable t;
  t.header.push_back("phone");
  for (const auto& n : spec.inventory().names) t.header.push_back(n);
  for (int p = 0; p < spec.num_phones(); ++p) {
    CsvRow row{spec.phones()[p]};
    for (int f = 0; f < spec.num_plfs(); ++f) row.push_back(FormatDouble(spec.M()(p, f)));
    t.rows.push_back(std::move(row));
  }
  WriteCsv(path, t);
}

std::string SpecHash(const ConversionSpec& spec) { return Sha256Hex(SpecToJson(spec)); }

Matrix EffectiveMatrix(const ConversionMatrix& m, const ScalingMatrix& s) {
  if (m.values.rows() != s.raw.rows() || m.values.cols() != s.raw.cols())
    throw Error(ErrorKind::kDimension, "scaling matrix shape does not match conversion matrix");
  return m.values.cwiseProduct(s.raw.array().exp().matrix());
}

std::filesystem::path DataDir() {
  if (const char* env = std::getenv("PLF_DATA_DIR")) return env;
  return PLF_DATA_DIR;
}

ConversionSpec DemoSpec() { return LoadSpec(DataDir() / "demo_spec.json"); }
ConversionSpec CanonicalTemplateSpec() { return LoadSpec(DataDir() / "plf21_template.json"); }

}  // namespace plf
