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

#ifndef PLF_COMMON_H_
#define PLF_COMMON_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace plf {

/// Row-major dynamic matrix; rows are frames (or samples) throughout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class ErrorKind {
  kFormat,
  kEmptyInput,
  kTooShort,
  kValidation,
  kDimension,
  kIndex,
  kIncompatible,
  kUndefined,
  kInsufficientData,
  kConfig,
  kDivergence,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

/// All domain failures are reported through this exception; the kind lets
/// callers (and the CLI exit-code mapping) distinguish them.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Derives an independent seed for a named component from a master seed.
uint64_t DeriveSeed(uint64_t master, std::string_view component);

/// Lowercase hex SHA-256 of a byte string / file contents.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

/// Minimal CSV support: comma separated, no quoting (none of our fields
/// contain commas).
using CsvRow = std::vector<std::string>;
struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  /// Index of a header column; throws kFormat if absent.
  size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;
};
CsvTable ReadCsv(const std::filesystem::path& path);
void WriteCsv(const std::filesystem::path& path, const CsvTable& table);

double ParseDouble(const std::string& s);
std::string FormatDouble(double v);

/// Writes a real matrix as CSV with the given header (may be empty).
void WriteMatrixCsv(const std::filesystem::path& path, const Matrix& m,
                    const std::vector<std::string>& header);
/// Reads an all-numeric CSV; a first row that does not parse is treated as a
/// header and returned through `header` when non-null.
Matrix ReadMatrixCsv(const std::filesystem::path& path,
                     std::vector<std::string>* header = nullptr);

}  // namespace plf

#endif  // PLF_COMMON_H_
