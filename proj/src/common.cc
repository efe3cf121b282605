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

#include "plf/common.h"

#include <openssl/evp.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace plf {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kTooShort: return "too-short";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kIncompatible: return "incompatibility";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> SplitComma(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool TryParseDouble(const std::string& s, double* v) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  if (begin < end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *v);
  return ec == std::errc() && ptr == end;
}

}  // namespace

uint64_t DeriveSeed(uint64_t master, std::string_view component) {
  // FNV-1a over the name, mixed with the master seed.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : component) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(master ^ SplitMix64(h));
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string Sha256File(const std::filesystem::path& path) {
  return Sha256Hex(ReadFile(path));
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

size_t CsvTable::Column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorKind::kFormat, "missing CSV column '" + std::string(name) + "'");
}

bool CsvTable::HasColumn(std::string_view name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = SplitComma(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != table.header.size())
      throw Error(ErrorKind::kFormat, path.string() + ": row has " +
                                          std::to_string(cells.size()) + " cells, header has " +
                                          std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (first) throw Error(ErrorKind::kFormat, path.string() + ": empty CSV");
  return table;
}

void WriteCsv(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream os;
  auto emit = [&os](const CsvRow& row) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  WriteFile(path, os.str());
}

double ParseDouble(const std::string& s) {
  double v = 0.0;
  if (!TryParseDouble(s, &v)) throw Error(ErrorKind::kFormat, "not a number: '" + s + "'");
  return v;
}

std::string FormatDouble(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void WriteMatrixCsv(const std::filesystem::path& path, const Matrix& m,
                    const std::vector<std::string>& header) {
  std::ostringstream os;
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << FormatDouble(m(r, c));
    os << '\n';
  }
  WriteFile(path, os.str());
}

Matrix ReadMatrixCsv(const std::filesystem::path& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = SplitComma(line);
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (size_t i = 0; i < cells.size() && numeric; ++i) numeric = TryParseDouble(cells[i], &vals[i]);
    if (!numeric) {
      if (!first) throw Error(ErrorKind::kFormat, path.string() + ": non-numeric row");
      if (header) *header = cells;
      first = false;
      continue;
    }
    first = false;
    if (!rows.empty() && vals.size() != rows.front().size())
      throw Error(ErrorKind::kFormat, path.string() + ": ragged rows");
    rows.push_back(std::move(vals));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

}  // namespace plf
